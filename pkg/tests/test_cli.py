import io
import json

import numpy as np
import pytest

from jpegdrm import parse_jpeg, parse_key, write_ppm
from jpegdrm.cli import run_cli


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run_cli([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def workdir(tmp_path, small_image):
    ppm = tmp_path / "in.ppm"
    ppm.write_bytes(write_ppm(small_image))
    assert run("encode", "--in", ppm, "--out", tmp_path / "p.jpg")[0] == 0
    return tmp_path


@pytest.fixture
def scrambled(workdir):
    code, _, _ = run("scramble", "--in", workdir / "p.jpg", "--out", workdir / "c.jpg",
                     "--key-out", workdir / "producer.dcfek", "--seed", 5)
    assert code == 0
    return workdir


def issue(d, user):
    return run("issue", "--trial", d / "c.jpg", "--producer-key", d / "producer.dcfek",
               "--user-id", user, "--key-out", d / f"{user}.dcfek", "--registry", d / "reg.json")


def test_full_pipeline(scrambled):
    d = scrambled
    assert issue(d, "alice")[0] == 0
    assert issue(d, "bob")[0] == 0
    assert run("decode", "--in", d / "c.jpg", "--key", d / "alice.dcfek", "--out", d / "a.jpg")[0] == 0
    code, out, _ = run("trace", "--in", d / "a.jpg", "--registry", d / "reg.json")
    assert code == 0 and out.strip() == "MATCH alice"
    assert len(json.loads((d / "reg.json").read_text())["users"]) == 2


def test_trace_on_trial(scrambled):
    d = scrambled
    issue(d, "alice")
    code, out, _ = run("trace", "--in", d / "c.jpg", "--registry", d / "reg.json")
    assert code == 3 and out.strip() == "NO_MATCH"


def test_producer_key_restores_coefficients(scrambled):
    d = scrambled
    assert run("decode", "--in", d / "c.jpg", "--key", d / "producer.dcfek", "--out", d / "r.jpg")[0] == 0
    assert parse_jpeg((d / "r.jpg").read_bytes()) == parse_jpeg((d / "p.jpg").read_bytes())
    assert parse_jpeg((d / "c.jpg").read_bytes()) != parse_jpeg((d / "p.jpg").read_bytes())


def test_scramble_deterministic_and_inputs_untouched(workdir):
    d = workdir
    before = (d / "p.jpg").read_bytes()
    for tag in "xy":
        run("scramble", "--in", d / "p.jpg", "--out", d / f"{tag}.jpg", "--key-out", d / f"{tag}.dcfek",
            "--seed", 9, "--xi-mode", "fixed:3", "--components", "luma")
    assert (d / "x.jpg").read_bytes() == (d / "y.jpg").read_bytes()
    assert (d / "x.dcfek").read_bytes() == (d / "y.dcfek").read_bytes()
    assert (d / "p.jpg").read_bytes() == before
    key = parse_key((d / "x.dcfek").read_bytes())
    assert {bk.xi for bk in key.block_keys if bk.m and bk.active} == {3}


def test_recompute_audit(scrambled):
    d = scrambled
    issue(d, "alice")
    run("decode", "--in", d / "c.jpg", "--key", d / "alice.dcfek", "--out", d / "a.jpg")
    code, out, _ = run("trace", "--in", d / "a.jpg", "--registry", d / "reg.json", "--recompute",
                       "--trial", d / "c.jpg", "--producer-key", d / "producer.dcfek")
    assert code == 0
    assert "audit alice" in out and "[ok]" in out and out.strip().endswith("MATCH alice")
    code, _, err = run("trace", "--in", d / "a.jpg", "--registry", d / "reg.json", "--recompute")
    assert code == 1


def test_psnr_and_inspect(scrambled):
    d = scrambled
    code, out, _ = run("psnr", "--ref", d / "in.ppm", "--test", d / "p.jpg")
    assert code == 0 and "dB" in out
    code, out, _ = run("psnr", "--ref", d / "in.ppm", "--test", d / "in.ppm")
    assert code == 0 and "IDENTICAL" in out
    code, out, _ = run("inspect", "--in", d / "c.jpg")
    assert code == 0 and "component 1" in out and "digest" in out


def test_usage_errors(workdir):
    assert run()[0] == 1
    assert run("bogus")[0] == 1
    assert run("encode", "--in", workdir / "in.ppm")[0] == 1
    assert run("encode", "--in", workdir / "in.ppm", "--out", workdir / "o.jpg", "--quality", 0)[0] == 1
    assert run("scramble", "--in", workdir / "p.jpg", "--out", workdir / "c.jpg",
               "--key-out", workdir / "k", "--xi-mode", "sometimes")[0] == 1


def test_format_errors_name_file(workdir):
    bad = workdir / "bad.jpg"
    bad.write_bytes(b"not a jpeg")
    code, _, err = run("inspect", "--in", bad)
    assert code == 2 and str(bad) in err
    code, _, err = run("inspect", "--in", workdir / "missing.jpg")
    assert code == 2 and "missing.jpg" in err
    code, _, err = run("decode", "--in", workdir / "p.jpg", "--key", bad, "--out", workdir / "o.jpg")
    assert code == 2 and "offset" in err


def test_precondition_errors(scrambled):
    d = scrambled
    issue(d, "alice")
    # key bound to another image
    code, _, err = run("decode", "--in", d / "p.jpg", "--key", d / "alice.dcfek", "--out", d / "o.jpg")
    assert code == 4
    # duplicate registration
    assert issue(d, "alice")[0] == 4
    # issuing against the wrong trial
    code, _, _ = run("issue", "--trial", d / "p.jpg", "--producer-key", d / "producer.dcfek",
                     "--user-id", "eve", "--key-out", d / "eve.dcfek", "--registry", d / "reg2.json")
    assert code == 4


def test_psnr_dimension_mismatch(tmp_path, small_image):
    a = tmp_path / "a.ppm"
    a.write_bytes(write_ppm(small_image))
    b = tmp_path / "b.ppm"
    from jpegdrm import RgbImage
    b.write_bytes(write_ppm(RgbImage.from_array(np.zeros((8, 8, 3), np.uint8))))
    assert run("psnr", "--ref", a, "--test", b)[0] == 1
