"""End-to-end command-line pipelines, exit codes and artifact formats."""
import csv
import io
import subprocess
import sys

import pytest

from arborescence import geometry
from arborescence.certificate import read_certificate
from arborescence.cli import Bundle, main, read_function, write_function
from arborescence.complex import Complex, read_complex, simplex, write_complex
from arborescence.generators import dunce_hat, grid


def run(*argv):
    return main([str(a) for a in argv])


def bundle(path):
    return Bundle.parse(path.read_text())


@pytest.fixture
def grid_file(tmp_path):
    p = tmp_path / "grid.txt"
    assert run("generate", "grid", 3, 3, "-o", p) == 0
    return p


def test_generate_writes_a_readable_complex(grid_file):
    b = bundle(grid_file)
    C = read_complex(b.get("complex"))
    assert C.f_vector == grid(3, 3).f_vector
    assert b.header["complex"] == C.hash


def test_morse_collapse_verify_pipeline(tmp_path, grid_file, capsys):
    m, c = tmp_path / "m.txt", tmp_path / "c.txt"
    assert run("morse", grid_file, "--from-corner", "-o", m) == 0
    assert "# critical-counts 1 0 0" in bundle(m).get("matching")
    assert run("collapse", "gradient", m, "-o", c) == 0
    capsys.readouterr()
    assert run("verify", c) == 0
    assert "valid" in capsys.readouterr().out
    b = bundle(c)
    C = read_complex(b.get("complex"))
    cert = read_certificate(b.get("certificate"), C)
    assert len(cert) == (len(C) - 1) // 2


def test_check_cat0_verdicts(tmp_path):
    corner, ring = tmp_path / "corner.txt", tmp_path / "ann.txt"
    run("generate", "cube-corner", "-o", corner)
    run("generate", "annulus", 3, "-o", ring)
    g = tmp_path / "g.txt"
    run("generate", "grid", 2, 2, 2, "-o", g)
    assert run("check-cat0", g, "-o", tmp_path / "r0") == 0
    assert run("check-cat0", corner, "-o", tmp_path / "r1") == 1
    assert "not-npc" in (tmp_path / "r1").read_text()
    assert run("check-cat0", ring, "-o", tmp_path / "r2") == 1


def test_zero_budget_still_accepts_grid(tmp_path):
    # the presentation of a grid reduces to the trivial group without any
    # Tietze moves, so even a zero budget gives a definite answer
    g = tmp_path / "g.txt"
    run("generate", "grid", 3, 3, "-o", g)
    assert run("check-cat0", g, "--budget", 0, "-o", tmp_path / "r") == 0


def test_exhaustive_reports_negatives(tmp_path):
    d, s = tmp_path / "d.txt", tmp_path / "s.txt"
    run("generate", "dunce-hat", "-o", d)
    run("generate", "boundary-simplex", 2, "-o", s)
    assert run("collapse", "exhaustive", d, "-o", tmp_path / "x") == 1
    assert run("collapse", "exhaustive", s, "-o", tmp_path / "y") == 1
    assert run("collapse", "greedy", d, "-o", tmp_path / "z") == 1


def test_exhaustive_budget_exit_code(tmp_path):
    # dunce hat with a pendant triangle: free faces exist, so only search refutes it
    D = dunce_hat()
    e = next(F for F in D.faces if F.dim == 1)
    C = Complex(set(D.faces) | simplex(*e.verts, 99).subfaces())
    p = tmp_path / "p.txt"
    b = Bundle()
    b.put("complex", write_complex(C))
    p.write_text(b.render())
    assert run("collapse", "exhaustive", p, "--budget", 3, "-o", tmp_path / "x") == 2
    assert run("collapse", "exhaustive", p, "-o", tmp_path / "y") == 1


def test_sd_schedule_pipeline(tmp_path):
    t, out = tmp_path / "t.txt", tmp_path / "sd.txt"
    run("generate", "simplex", 2, "-o", t)
    assert run("collapse", "sd-schedule", t, "--seed", 4, "-o", out) == 0
    b = bundle(out)
    sd = read_complex(b.get("complex"))
    assert len(sd) == 25 and b.get("schedule").count("schedule") == 6
    assert run("verify", out) == 0


def test_filtration_and_verify(tmp_path):
    out = tmp_path / "f.txt"
    assert run("filtration", "--grid", 3, "-o", out) == 0
    b = bundle(out)
    assert len(b.all("certificate")) == 3
    assert run("verify", out) == 0


def test_tampered_certificate_fails_verification(tmp_path, grid_file):
    c = tmp_path / "c.txt"
    run("collapse", "greedy", grid_file, "-o", c)
    b = bundle(c)
    lines = b.get("certificate").splitlines()
    steps = [i for i, l in enumerate(lines) if l.startswith("collapse")]
    lines[steps[0]], lines[steps[-1]] = lines[steps[-1]], lines[steps[0]]
    b.put("certificate", "\n".join(lines) + "\n")
    c.write_text(b.render())
    assert run("verify", c) == 1


def exit_code(*argv):
    try:
        return run(*argv)
    except SystemExit as exc:
        return exc.code


@pytest.mark.parametrize("argv", [["generate", "nosuch"], ["generate", "grid", "x", "2"],
                                  ["collapse", "bogus"], ["verify", "MISSING"]])
def test_bad_input_exits_three(argv, tmp_path):
    argv = [str(tmp_path / a) if a == "MISSING" else a for a in argv]
    assert exit_code(*argv) == 3


def test_garbage_complex_exits_three(tmp_path):
    p = tmp_path / "junk.txt"
    p.write_text("this is not a complex\n")
    assert run("check-cat0", p) == 3


def test_deterministic_output_is_byte_identical(tmp_path, grid_file):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    run("morse", grid_file, "--seed", 7, "--deterministic", "-o", a)
    run("morse", grid_file, "--seed", 7, "--deterministic", "-o", b)
    assert a.read_bytes() == b.read_bytes()
    assert "elapsed-ms" not in a.read_text()


def test_delta_flag_is_recorded_and_restored(tmp_path, grid_file):
    before = geometry.DELTA
    out = tmp_path / "m.txt"
    run("morse", grid_file, "--delta", "1e-9", "-o", out)
    assert bundle(out).header["delta"] == repr(1e-9)
    assert geometry.DELTA == before


def test_function_section_round_trip():
    C = grid(2, 2)
    f = geometry.DistanceFunction(C, [0.37, 1.21])
    g = read_function(write_function(f), C)
    assert all(abs(f.face_min(i)[0] - g.face_min(i)[0]) < 1e-12 for i in range(len(C)))
    h = geometry.VertexFunction.random(C, 3)
    k = read_function(write_function(h), C)
    assert [k.vertex_value(v) for v in C.vertices] == [h.vertex_value(v) for v in C.vertices]


def test_bundle_round_trip():
    b = Bundle()
    b.header = {"seed": "1"}
    b.put("complex", "x\n")
    b.add("certificate", "a\n")
    b.add("certificate", "b\n")
    back = Bundle.parse(b.render())
    assert back.header == b.header and back.all("certificate") == ["a\n", "b\n"]


def test_bench_csv(tmp_path):
    out = tmp_path / "bench.csv"
    assert run("bench", "--families", "grid", "grid-filtration", "--max-size", 2, "-o", out) == 0
    rows = list(csv.DictReader(io.StringIO(
        "".join(l for l in out.read_text().splitlines(True) if not l.startswith("#")))))
    assert rows and set(rows[0]) == {"family", "size", "faces", "op", "millis", "peak_bytes"}
    assert {r["family"] for r in rows} == {"grid", "grid-filtration"}


def test_console_entry_point_runs():
    r = subprocess.run([sys.executable, "-m", "arborescence.cli", "generate", "simplex", "1"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "%% complex" in r.stdout
