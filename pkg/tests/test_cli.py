import csv
import json
import math

import pytest

from crosscorr import cli
from crosscorr.experiments import RECORD_FIELDS, read_records
from crosscorr.seqcore import read_sequences


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def seq_file(tmp_path):
    def make(text, name="seqs.txt"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return make


class TestMeasureCommand:
    def test_phi_fixture(self, capsys, seq_file):
        code, out, err = run(capsys, "measure", "--input",
                             seq_file("++++\n+-+-\n"), "--k", "2")
        assert code == 0
        (line,) = out.splitlines()
        rec = json.loads(line)
        assert rec["value"] == 3
        assert rec["elapsed_ms"] == 0
        assert (rec["mode"], rec["measure"], rec["trial"]) == \
            ("family", "phi", 0)
        assert list(rec) == list(RECORD_FIELDS)

    def test_single_sequence_fixture(self, capsys, seq_file):
        code, out, _ = run(capsys, "measure", "--input",
                           seq_file("++-+--\n"), "--measure", "c", "--k", "2")
        assert code == 0
        rec = json.loads(out)
        assert rec["value"] == 3
        assert rec["witness"] == {"members": [0, 0], "d": [1, 2], "m": 3}

    def test_phitilde_duplicate_lines_collide(self, capsys, seq_file):
        code, out, _ = run(capsys, "measure", "--input",
                           seq_file("++++\n++++\n"), "--measure", "phitilde",
                           "--k", "2")
        assert code == 0
        assert json.loads(out)["value"] == 4

    def test_comments_and_blanks_ignored(self, capsys, seq_file):
        path = seq_file("# family\n\n++++\n+-+-\n")
        code, out, _ = run(capsys, "measure", "--input", path, "--k", "2")
        assert code == 0
        assert json.loads(out)["cardinality"] == 2

    def test_stdout_byte_identical(self, capsys, seq_file):
        path = seq_file("++-+--\n-+-++-\n")
        argv = ("measure", "--input", path, "--k-min", "2", "--k-max", "3",
                "--seed", "9")
        first = run(capsys, *argv)
        second = run(capsys, *argv)
        threaded = run(capsys, *argv, "--threads", "8")
        assert first[0] == second[0] == threaded[0] == 0
        assert first[1] == second[1] == threaded[1]

    def test_csv_format(self, capsys, seq_file):
        code, out, _ = run(capsys, "measure", "--input",
                           seq_file("++-+--\n"), "--measure", "c",
                           "--k", "2", "--format", "csv")
        assert code == 0
        header, row = out.splitlines()
        cols = header.split(",")
        assert "witness_members" in cols and "witness_m" in cols
        values = dict(zip(cols, row.split(",")))
        assert values["value"] == "3"
        assert values["witness_members"] == "0;0"
        assert values["witness_d"] == "1;2"
        assert values["witness_m"] == "3"
        assert values["elapsed_ms"] == "0"

    def test_out_keeps_real_timings_and_appends(self, capsys, seq_file,
                                                tmp_path):
        out_path = tmp_path / "records.jsonl"
        argv = ("measure", "--input", seq_file("++-+--\n-+-++-\n"),
                "--k", "2", "--out", str(out_path))
        code, out, _ = run(capsys, *argv)
        assert code == 0
        stored = read_records(out_path)
        shown = [json.loads(line) for line in out.splitlines()]
        assert len(stored) == len(shown) == 1
        assert stored[0]["elapsed_ms"] >= 0.0
        for field in RECORD_FIELDS:
            if field != "elapsed_ms":
                assert stored[0][field] == shown[0][field]
        run(capsys, *argv)
        assert len(read_records(out_path)) == 2

    def test_budget_exit_2(self, capsys, seq_file):
        path = seq_file("+-" * 16 + "\n" + "-+" * 16 + "\n")
        code, out, err = run(capsys, "measure", "--input", path,
                             "--k", "2", "--budget", "5")
        assert code == 2
        assert out == ""
        assert "randomized estimator" in err

    def test_budget_approx_fallback(self, capsys, seq_file):
        path = seq_file("+-" * 16 + "\n" + "-+" * 16 + "\n")
        argv = ("measure", "--input", path, "--k", "2", "--budget", "5",
                "--approx", "--trials", "400", "--seed", "3")
        code, out, _ = run(capsys, *argv)
        assert code == 0
        rec = json.loads(out)
        assert rec["approximate"] is True
        assert run(capsys, *argv)[1] == out

    def test_missing_file(self, capsys, tmp_path):
        code, out, err = run(capsys, "measure", "--input",
                             str(tmp_path / "nope.txt"), "--k", "2")
        assert code == 1
        assert out == ""
        assert "nope.txt" in err

    def test_empty_file(self, capsys, seq_file):
        code, out, err = run(capsys, "measure", "--input",
                             seq_file("# nothing\n"), "--k", "2")
        assert code == 1
        assert "no sequences" in err

    def test_malformed_line_location(self, capsys, seq_file):
        code, _, err = run(capsys, "measure", "--input",
                           seq_file("++++\n+*++\n"), "--k", "2")
        assert code == 1
        assert "seqs.txt:2:" in err

    def test_conflicting_k_flags(self, capsys, seq_file):
        code, out, err = run(capsys, "measure", "--input",
                             seq_file("++++\n"), "--k", "2", "--k-min", "2")
        assert code == 1
        assert out == ""
        assert "error (422)" in err


class TestSampleCommand:
    def test_family(self, capsys):
        code, out, _ = run(capsys, "sample", "--length", "8", "--size", "3",
                           "--seed", "5")
        assert code == 0
        data = json.loads(out)
        assert data["mode"] == "family"
        assert len(set(data["sequences"])) == 3
        assert all(len(s) == 8 for s in data["sequences"])

    def test_deterministic(self, capsys):
        argv = ("sample", "--length", "8", "--size", "3", "--seed", "5")
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]

    def test_out_file_round_trips(self, capsys, tmp_path):
        path = tmp_path / "fam.txt"
        code, out, _ = run(capsys, "sample", "--length", "10", "--size", "4",
                           "--seed", "2", "--out", str(path))
        assert code == 0
        loaded = [s.text() for s in read_sequences(path)]
        assert loaded == json.loads(out)["sequences"]
        run(capsys, "sample", "--length", "10", "--size", "4",
            "--seed", "2", "--out", str(path))
        assert len(read_sequences(path)) == 4  # overwrite, not append

    def test_generator_allows_repeats(self, capsys):
        code, out, _ = run(capsys, "sample", "--length", "1", "--seeds", "4",
                           "--seed", "0")
        assert code == 0
        data = json.loads(out)
        assert data["mode"] == "generator"
        assert len(data["sequences"]) == 4

    def test_size_and_seeds_conflict(self, capsys):
        code, out, err = run(capsys, "sample", "--length", "8",
                             "--size", "2", "--seeds", "2")
        assert code == 1
        assert out == ""
        assert "not allowed" in err

    def test_requires_one_of_size_seeds(self, capsys):
        code, _, err = run(capsys, "sample", "--length", "8")
        assert code == 1
        assert "required" in err


class TestMcCommand:
    ARGV = ("mc", "--length", "8", "--size", "2", "--k-min", "2",
            "--k-max", "3", "--trials", "3", "--seed", "1")

    def test_records_and_summary(self, capsys):
        code, out, err = run(capsys, *self.ARGV)
        assert code == 0
        recs = [json.loads(line) for line in out.splitlines()]
        assert len(recs) == 6
        assert all(rec["elapsed_ms"] == 0 for rec in recs)
        assert [(r["trial"], r["k"]) for r in recs] == \
            [(t, k) for t in range(3) for k in (2, 3)]
        summary = json.loads(err.splitlines()[-1])
        assert summary["total_records"] == 6
        assert summary["confidence"] == 0.05
        assert [g["k"] for g in summary["groups"]] == [2, 3]

    def test_stdout_byte_identical_across_threads(self, capsys):
        base = run(capsys, *self.ARGV)
        rerun = run(capsys, *self.ARGV)
        threaded = run(capsys, *self.ARGV, "--threads", "8")
        assert base[1] == rerun[1] == threaded[1]

    def test_csv(self, capsys):
        code, out, _ = run(capsys, *self.ARGV, "--format", "csv")
        assert code == 0
        lines = out.splitlines()
        assert len(lines) == 7
        assert lines[0].startswith("n,k,mode,")

    def test_generator_mode(self, capsys):
        code, out, _ = run(capsys, "mc", "--length", "8", "--seeds", "2",
                           "--k", "2", "--trials", "2")
        assert code == 0
        assert all(json.loads(l)["measure"] == "phi_tilde"
                   for l in out.splitlines())

    def test_budget_exit_2(self, capsys):
        code, out, err = run(capsys, "mc", "--length", "64", "--size", "4",
                             "--k", "2", "--trials", "1", "--budget", "10")
        assert code == 2
        assert out == ""
        assert "budget" in err

    def test_budget_approx_runs(self, capsys):
        code, out, _ = run(capsys, "mc", "--length", "64", "--size", "4",
                           "--k", "2", "--trials", "1", "--budget", "10",
                           "--approx")
        assert code == 0
        assert json.loads(out)["approximate"] is True

    def test_out_preserves_timings(self, capsys, tmp_path):
        path = tmp_path / "mc.jsonl"
        code, _, _ = run(capsys, *self.ARGV, "--out", str(path))
        assert code == 0
        stored = read_records(path)
        assert len(stored) == 6
        assert any(rec["elapsed_ms"] > 0.0 for rec in stored)


class TestBoundsCommand:
    def test_fixture(self, capsys):
        code, out, _ = run(capsys, "bounds", "--length", "100", "--k", "2",
                           "--cardinality", "4")
        assert code == 0
        data = json.loads(out)
        assert data["lower"] == pytest.approx(13.434, abs=1e-3)
        assert data["upper"] == pytest.approx(83.96, abs=5e-3)
        assert data["warnings"] == []

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "bounds", "--length", "100", "--k", "2",
                           "--cardinality", "4", "--format", "csv")
        rows = dict(csv.reader(out.splitlines()[1:]))
        assert float(rows["lower"]) == pytest.approx(13.434, abs=1e-3)
        assert rows["which"] == "family"

    def test_single(self, capsys):
        code, out, _ = run(capsys, "bounds", "--length", "100", "--k", "2",
                           "--which", "single")
        assert json.loads(out)["lower"] == pytest.approx(11.667, abs=1e-3)


class TestTailsCommand:
    def test_exact_fixture(self, capsys):
        code, out, _ = run(capsys, "tails", "--n", "4", "--t", "3", "--exact")
        assert code == 0
        data = json.loads(out)
        assert data["value"] == pytest.approx(0.3125, rel=1e-12)
        assert data["detail"] is None

    def test_closed(self, capsys):
        _, out, _ = run(capsys, "tails", "--closed", "2.0")
        assert json.loads(out)["value"] == pytest.approx(3.346e-5, rel=1e-3)

    def test_integral(self, capsys):
        _, out, _ = run(capsys, "tails", "--integral", "0.0")
        assert json.loads(out)["value"] == 0.5

    def test_hoeffding(self, capsys):
        _, out, _ = run(capsys, "tails", "--hoeffding", "10", "--n", "50")
        assert json.loads(out)["value"] == pytest.approx(math.exp(-1.0),
                                                         rel=1e-12)

    def test_point(self, capsys):
        _, out, _ = run(capsys, "tails", "--point", "0", "--n", "100")
        data = json.loads(out)
        assert data["value"] == pytest.approx(0.0797885, abs=1e-7)
        assert data["detail"]["ratio"] == pytest.approx(0.9975, abs=1e-4)

    def test_requires_exactly_one_mode(self, capsys):
        code, out, err = run(capsys, "tails", "--n", "4")
        assert code == 1
        assert "required" in err
        code, _, err = run(capsys, "tails", "--exact", "--closed", "1.0",
                           "--n", "4", "--t", "2")
        assert code == 1
        assert "not allowed" in err

    def test_missing_n_maps_to_exit_1(self, capsys):
        code, out, err = run(capsys, "tails", "--exact", "--t", "3")
        assert code == 1
        assert out == ""
        assert "error (422)" in err


class TestRkCommand:
    def test_fixture(self, capsys):
        code, out, _ = run(capsys, "rk", "--length", "24", "--k", "2",
                           "--seeds", "2")
        assert code == 0
        data = json.loads(out)
        assert (data["r"], data["achievable"], data["regime"], data["m"]) == \
            (2, True, 1, 8)
        assert data["threshold"] == pytest.approx(0.35312, abs=5e-5)

    def test_infinite_threshold_prints_null(self, capsys):
        code, out, _ = run(capsys, "rk", "--length", "6", "--k", "5",
                           "--seeds", "2")
        assert code == 0
        assert '"threshold":null' in out
        assert json.loads(out)["achievable"] is False


class TestOracleCommand:
    def test_exact_pmf(self, capsys):
        code, out, _ = run(capsys, "oracle", "--length", "3", "--size", "1",
                           "--k", "2")
        assert code == 0
        assert json.loads(out)["pmf"] == {"1": 0.5, "2": 0.5}

    def test_with_trials(self, capsys):
        code, out, _ = run(capsys, "oracle", "--length", "3", "--size", "1",
                           "--k", "2", "--trials", "400", "--seed", "0")
        data = json.loads(out)
        assert data["tv"] is not None and data["tv"] < 0.1

    def test_deterministic(self, capsys):
        argv = ("oracle", "--length", "3", "--size", "1", "--k", "2",
                "--trials", "100", "--seed", "4")
        assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


class TestCollideCommand:
    def test_fixture(self, capsys):
        code, out, _ = run(capsys, "collide", "--length", "2", "--seeds", "2",
                           "--trials", "400", "--seed", "3")
        assert code == 0
        data = json.loads(out)
        assert data["formula"] == pytest.approx(0.75, rel=1e-12)
        assert abs(data["empirical"] - 0.75) < 0.1


class TestTopLevel:
    def test_help_exits_zero(self, capsys):
        code, out, _ = run(capsys, "--help")
        assert code == 0
        assert "measure" in out and "collide" in out

    def test_unknown_command(self, capsys):
        code, out, err = run(capsys, "frobnicate")
        assert code == 1
        assert out == ""

    def test_missing_required_flag(self, capsys):
        code, _, err = run(capsys, "measure")
        assert code == 1
        assert "--input" in err
