import pytest

from treepack.cli import EXIT_OK, EXIT_REJECTED, EXIT_USAGE, main
from treepack.classify import classify
from treepack.instance import read_instance
from treepack.pipeline import make_profile


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


@pytest.fixture
def instance_file(tmp_path, capsys):
    path = tmp_path / "inst.txt"
    code, _ = run(capsys, "gen", "--kind", "mixed", "--n", "1000", "--t", "2", "--variant", "kn1",
                  "--seed", "1", "--out", str(path))
    assert code == EXIT_OK
    return path


def test_gen_mixed_covers_every_class(tmp_path, capsys):
    path = tmp_path / "big.txt"
    assert run(capsys, "gen", "--kind", "mixed", "--n", "10000", "--t", "3", "--variant", "kn1",
               "--seed", "1", "--out", str(path))[0] == EXIT_OK
    inst = read_instance(path)
    prof = make_profile(10000, "thm2", t=3)
    assert [t.m for t in inst.trees] == [10000, 9999, 9998]
    assert {classify(t, prof.thresholds).tag for t in inst.trees} == {"TypeI", "TypeII", "PathLike"}


def test_gen_to_stdout_is_byte_identical(capsys):
    a = run(capsys, "gen", "--kind", "random", "--n", "30", "--t", "3", "--seed", "5")[1].out
    b = run(capsys, "gen", "--kind", "random", "--n", "30", "--t", "3", "--seed", "5")[1].out
    assert a == b and a.startswith("30 3 kn1\n")


def test_round_trip(instance_file, tmp_path, capsys):
    col = tmp_path / "col.txt"
    code, out = run(capsys, "pack", str(instance_file), "--out", str(col))
    assert code == EXIT_OK
    assert "cmd=pack outcome=packed" in out.out and "stage=zones main=" in out.out
    code, out = run(capsys, "verify", str(instance_file), str(col))
    assert code == EXIT_OK and "ok=True" in out.out


def test_pack_output_is_byte_identical(instance_file, tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run(capsys, "pack", str(instance_file), "--out", str(a), "--seed", "3")
    run(capsys, "pack", str(instance_file), "--out", str(b), "--seed", "3")
    assert a.read_bytes() == b.read_bytes()


def test_verify_rejects_a_tampered_coloring(instance_file, tmp_path, capsys):
    col = tmp_path / "col.txt"
    run(capsys, "pack", str(instance_file), "--out", str(col))
    lines = col.read_text().splitlines()
    # drop one colored edge line
    idx = next(k for k, line in enumerate(lines) if line.count(" ") == 2)
    col.write_text("\n".join(lines[:idx] + lines[idx + 1 :]) + "\n")
    code, out = run(capsys, "verify", str(instance_file), str(col))
    assert code == EXIT_REJECTED


def test_precondition_is_a_rejection(tmp_path, capsys):
    path = tmp_path / "stars.txt"
    run(capsys, "gen", "--kind", "star", "--n", "1000", "--t", "2", "--variant", "kn", "--out", str(path))
    code, out = run(capsys, "pack", str(path), "--mode", "prop")
    assert code == EXIT_REJECTED and "outcome=rejected" in out.out


@pytest.mark.parametrize("argv", [["pack"], ["gen", "--n", "10"], ["frobnicate"], ["gen", "--n", "x"],
                                  ["gen", "--kind", "nope", "--n", "10", "--t", "2"], ["bench"]])
def test_usage_errors(argv, capsys):
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_oracle_tpc_and_claim(capsys):
    code, out = run(capsys, "oracle", "--tpc", "5")
    assert code == EXIT_OK and "status=ok" in out.out
    code, out = run(capsys, "oracle", "--claim", "matching2", "--trials", "3")
    assert code == EXIT_OK and "discrepancies=0" in out.out


def test_oracle_on_a_file(tmp_path, capsys):
    path = tmp_path / "small.txt"
    run(capsys, "gen", "--kind", "random", "--n", "7", "--t", "3", "--out", str(path))
    code, out = run(capsys, "oracle", str(path), "--time-limit", "10")
    assert code == EXIT_OK and "outcome=packed" in out.out


def test_bench_csv(capsys):
    code, out = run(capsys, "bench", "1000", "--t", "2", "--trials", "2")
    rows = out.out.strip().splitlines()
    assert code == EXIT_OK and rows[0].startswith("n,t,trials,success_rate")
    assert rows[1].startswith("1000,2,2,1.000")


def test_dot_filters_colors(instance_file, tmp_path, capsys):
    col = tmp_path / "col.txt"
    run(capsys, "pack", str(instance_file), "--out", str(col))
    code, out = run(capsys, "dot", str(col), "--colors", "2")
    assert code == EXIT_OK and out.out.startswith("graph packing {")
    body = out.out.splitlines()[1:-1]
    assert body and all('label="2"' in line for line in body)
