import csv
import io
import os
import subprocess
import sys

import numpy as np
import pytest

from pdloss import (
    Histogram,
    Image,
    LossConfig,
    emd_hist,
    fmap_read,
    image_read,
    image_write,
    jsd,
    kld,
    pdl_loss,
)
from pdloss.cli import main, toy_shift_table
from pdloss.synthetic import box_blur, demo_scene

DATA = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")
GOLDEN = {
    "compare_default.txt": ["compare", "pair_a.pgm", "pair_b.pgm"],
    "compare_rsp.txt": ["compare", "pair_a.pgm", "pair_b.pgm", "--scheme", "rsp", "--factor", "4", "--seed", "3"],
    "compare_same.txt": ["compare", "pair_a.pgm", "pair_a.pgm"],
    "toy_shift.txt": ["toy-shift"],
    "ablate.txt": ["ablate", "pair_a.pgm", "pair_b.pgm", "--seeds", "4", "--factors", "1,2"],
    "fmap_pdl.txt": ["fmap-pdl", "ref_a.fmap", "ref_b.fmap"],
}


def run(argv, cwd=DATA):
    old = os.getcwd()
    os.chdir(cwd)
    try:
        buf = io.StringIO()
        code = main(argv, out=buf)
    finally:
        os.chdir(old)
    return code, buf.getvalue()


def run_process(argv, threads, cwd=DATA):
    env = dict(os.environ, PDL_THREADS=str(threads))
    return subprocess.run(
        [sys.executable, "-m", "pdloss", *argv], cwd=cwd, env=env, capture_output=True
    )


def parse_report(text):
    return dict(line.split("=", 1) for line in text.splitlines())


def parse_table(text):
    lines = [line for line in text.splitlines() if not line.startswith("#")]
    header = lines[0].split("\t")
    return [dict(zip(header, line.split("\t"))) for line in lines[1:]]


@pytest.mark.parametrize("threads", [1, 4])
@pytest.mark.parametrize("name", sorted(GOLDEN))
def test_golden_files_byte_identical(name, threads):
    with open(os.path.join(DATA, "golden", name), "rb") as fh:
        expected = fh.read()
    proc = run_process(GOLDEN[name], threads)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == expected


def test_report_format():
    code, text = run(GOLDEN["compare_default.txt"])
    assert code == 0
    keys = [line.split("=", 1)[0] for line in text.splitlines()]
    assert keys == sorted(keys)
    report = parse_report(text)
    for key in ("psnr", "swd", "pdl.total", "pdl.pixel", "pdl.distribution", "percep.total", "manifest.version"):
        assert key in report
    assert report["manifest.seed"] == "0"
    assert report["pdl.total"] == format(float(report["pdl.total"]), ".9g")


def test_compare_identical_pair():
    report = parse_report(run(["compare", "pair_a.pgm", "pair_a.pgm"])[1])
    assert report["psnr"] == "inf"
    assert float(report["pdl.total"]) == 0.0
    assert float(report["percep.total"]) == 0.0
    assert float(report["swd"]) == 0.0


def test_compare_lambda_zero_is_mean_abs_difference():
    report = parse_report(run(["compare", "pair_a.pgm", "pair_b.pgm", "--lambda", "0"])[1])
    a = image_read(os.path.join(DATA, "pair_a.pgm")).data
    b = image_read(os.path.join(DATA, "pair_b.pgm")).data
    assert float(report["pdl.total"]) == pytest.approx(np.mean(np.abs(a - b)), rel=1e-8)


def test_compare_matches_library():
    report = parse_report(run(["compare", "pair_a.pgm", "pair_b.pgm", "--lambda", "0.5"])[1])
    u = image_read(os.path.join(DATA, "pair_a.pgm"))
    v = image_read(os.path.join(DATA, "pair_b.pgm"))
    b = pdl_loss(u, v, LossConfig(lam=0.5))
    assert float(report["pdl.total"]) == pytest.approx(b.total, rel=1e-8)
    assert float(report["pdl.distribution"]) == pytest.approx(b.distribution_term, rel=1e-8)


def test_shape_mismatch_exit_code(tmp_path):
    image_write(Image(np.zeros((1, 16, 16))), tmp_path / "small.pgm")
    code, _ = run(["compare", "pair_a.pgm", str(tmp_path / "small.pgm")])
    assert code == 2


def test_missing_file_exit_code():
    assert run(["compare", "pair_a.pgm", "nope.pgm"])[0] == 3


def test_malformed_file_exit_code(tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n4 4\n255\nxx")
    assert run(["compare", str(bad), str(bad)])[0] == 2


def test_usage_errors_exit_two():
    assert run(["compare", "pair_a.pgm"])[0] == 2
    assert run(["compare", "pair_a.pgm", "pair_b.pgm", "--scheme", "max"])[0] == 2
    assert run(["compare", "pair_a.pgm", "pair_b.pgm", "--scheme", "id", "--factor", "2"])[0] == 2


def test_invalid_thread_count_exit_code():
    proc = run_process(["toy-shift"], "zero")
    assert proc.returncode == 2
    assert run_process(["toy-shift"], 0).returncode == 2


def test_toy_shift_matches_recomputation():
    rows = parse_table(run(["toy-shift"])[1])
    assert [int(r["shift"]) for r in rows] == list(range(11))
    base = np.array([1.0, 2.0, 1.0]) / 4
    bins = 13
    p = np.zeros(bins)
    p[:3] = base
    centers = np.arange(bins, dtype=float)
    for r in rows:
        k = int(r["shift"])
        q = np.zeros(bins)
        q[k : k + 3] = base
        hp, hq = Histogram(p, centers), Histogram(q, centers)
        assert float(r["emd"]) == pytest.approx(k, rel=1e-8, abs=1e-12)
        assert float(r["kld"]) == pytest.approx(kld(hp, hq), rel=1e-8, abs=1e-12)
        assert float(r["jsd"]) == pytest.approx(jsd(hp, hq), rel=1e-8, abs=1e-12)
        assert float(r["emd"]) == pytest.approx(emd_hist(hp, hq), rel=1e-8, abs=1e-12)
        assert r["disjoint"] == ("true" if k >= 3 else "false")


def test_toy_shift_emd_linear_in_shift():
    rows = toy_shift_table(30, 12, 1e-6, [1, 2, 1])
    emd = [r[1] for r in rows]
    for k in range(1, 7):
        assert emd[2 * k] == pytest.approx(2 * emd[k], rel=1e-12)


def test_ablate_identity_and_variance():
    rows = parse_table(run(["ablate", "pair_a.pgm", "pair_b.pgm", "--schemes", "id,rsp", "--factors", "1,8"])[1])
    ids = [r for r in rows if r["scheme"] == "id"]
    assert len(ids) == 1 and float(ids[0]["stdev"]) == 0.0
    rsp = {int(r["factor"]): r for r in rows if r["scheme"] == "rsp"}
    assert int(rsp[1]["runs"]) == 20
    assert float(rsp[8]["stdev"]) < float(rsp[1]["stdev"])


def test_ablate_identical_pair_all_zero():
    rows = parse_table(run(["ablate", "pair_a.pgm", "pair_a.pgm", "--seeds", "3"])[1])
    assert len(rows) == 1 + 3 * 4
    assert all(float(r["mean"]) == 0.0 and float(r["stdev"]) == 0.0 for r in rows)


def test_descend_outputs(tmp_path):
    v = demo_scene(16)
    u0 = box_blur(v)
    image_write(u0, tmp_path / "u0.pgm")
    image_write(v, tmp_path / "v.pgm")
    argv = ["descend", "u0.pgm", "v.pgm", "--steps", "3", "--out", "u.pgm", "--trace", "t.csv"]
    code, text = run(argv, cwd=tmp_path)
    assert code == 0
    with open(tmp_path / "t.csv") as fh:
        lines = fh.read().splitlines()
    assert lines[0] == "step,total,pixel,distribution"
    rows = list(csv.DictReader(lines))
    assert [int(r["step"]) for r in rows] == [0, 1, 2, 3]
    u0q = image_read(tmp_path / "u0.pgm")
    vq = image_read(tmp_path / "v.pgm")
    assert float(rows[0]["total"]) == pytest.approx(pdl_loss(u0q, vq).total, rel=1e-8)
    report = parse_report(text)
    assert report["initial.total"] == rows[0]["total"]
    assert report["final.total"] == rows[-1]["total"]
    assert image_read(tmp_path / "u.pgm").shape == (1, 16, 16)


def test_descend_zero_steps_returns_start(tmp_path):
    image_write(box_blur(demo_scene(16)), tmp_path / "u0.pgm")
    image_write(demo_scene(16), tmp_path / "v.pgm")
    code, _ = run(["descend", "u0.pgm", "v.pgm", "--steps", "0", "--out", "u.pgm", "--trace", "t.csv"], cwd=tmp_path)
    assert code == 0
    assert (tmp_path / "u.pgm").read_bytes() == (tmp_path / "u0.pgm").read_bytes()
    assert len((tmp_path / "t.csv").read_text().splitlines()) == 2


def test_extract_then_fmap_pdl(tmp_path):
    a = os.path.join(DATA, "pair_a.pgm")
    b = os.path.join(DATA, "pair_b.pgm")
    assert run(["extract", a, "--out", str(tmp_path / "a.fmap")])[0] == 0
    assert run(["extract", b, "--out", str(tmp_path / "b.fmap")])[0] == 0
    fm = fmap_read(tmp_path / "a.fmap")
    assert (fm.sites, fm.dims) == (64, 32)
    same = parse_report(run(["fmap-pdl", str(tmp_path / "a.fmap"), str(tmp_path / "a.fmap")])[1])
    assert float(same["pdl.total"]) == 0.0
    # features stored as float32, so agreement with compare is to single precision
    via_files = parse_report(run(["fmap-pdl", str(tmp_path / "a.fmap"), str(tmp_path / "b.fmap")])[1])
    direct = parse_report(run(["compare", a, b])[1])
    assert float(via_files["pdl.distribution"]) == pytest.approx(float(direct["pdl.distribution"]), rel=1e-5)


def test_fmap_fixture_matches_recorded_value():
    report = parse_report(run(["fmap-pdl", "ref_a.fmap", "ref_b.fmap"])[1])
    with open(os.path.join(DATA, "ref_fmap_value.txt")) as fh:
        recorded = float(fh.read())
    assert float(report["pdl.distribution"]) == pytest.approx(recorded, rel=1e-8)
    assert float(report["pdl.total"]) == pytest.approx(0.01 * recorded, rel=1e-8)


def test_fmap_shape_mismatch(tmp_path):
    from pdloss import FeatureMap, fmap_write

    fmap_write(FeatureMap(np.ones((4, 6), dtype=np.float32)), tmp_path / "x.fmap")
    assert run(["fmap-pdl", "ref_a.fmap", str(tmp_path / "x.fmap")])[0] == 2


def test_module_entry_point_version():
    proc = subprocess.run([sys.executable, "-m", "pdloss", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("pdloss ")
