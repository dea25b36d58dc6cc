"""Certificate replay, hashing and the text format."""
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arborescence.certificate import (CertificateError, certify, read_certificate, transfer,
                                      verify_certificate, write_certificate)
from arborescence.collapse import greedy_collapse
from arborescence.complex import build_complex, simplex
from arborescence.generators import grid, simplex_complex


def triangle_certificate():
    C = build_complex([simplex(0, 1, 2)])
    i = C.index
    steps = [(i[simplex(1, 2)], i[simplex(0, 1, 2)]), (i[simplex(2)], i[simplex(0, 2)]),
             (i[simplex(1)], i[simplex(0, 1)])]
    return C, certify(C, steps)


def test_triangle_to_vertex_is_valid():
    C, cert = triangle_certificate()
    assert verify_certificate(cert)
    assert cert.end_faces() == [simplex(0)]


def test_swapped_steps_fail_at_earlier_step():
    C, cert = triangle_certificate()
    cert.steps[0], cert.steps[1] = cert.steps[1], cert.steps[0]
    v = verify_certificate(cert)
    assert not v and v.step == 0 and "not free" in v.reason


def test_empty_certificate_on_target_is_valid():
    C = build_complex([simplex(0, 1, 2)])
    cert = certify(C, [])
    assert verify_certificate(cert) and cert.source == cert.target


def test_certify_raises_on_bad_step():
    C = build_complex([simplex(0, 1, 2)])
    with pytest.raises(CertificateError):
        certify(C, [(C.index[simplex(0)], C.index[simplex(0, 1)])])


def test_wrong_complex_detected_by_source_hash():
    _, cert = triangle_certificate()
    other = simplex_complex(3)
    v = verify_certificate(cert, other)
    assert not v and "source" in v.reason


def test_tampered_target_detected():
    _, cert = triangle_certificate()
    cert.target = "0" * 16
    v = verify_certificate(cert)
    assert not v and v.step == len(cert)


def test_out_of_range_index_reported():
    C, cert = triangle_certificate()
    cert.steps.append((99, 100))
    assert verify_certificate(cert).reason == "face index out of range"


def test_text_round_trip():
    C, cert = triangle_certificate()
    text = write_certificate(cert, {"seed": 0})
    back = read_certificate(text, C)
    assert back.steps == cert.steps and back.source == cert.source and back.target == cert.target
    assert verify_certificate(back)


def test_text_round_trip_keeps_start_set():
    C = grid(2, 1)
    stage = C.sub(C.closure([C.index[C.vertex_face(0)]]))
    start = C.sub([i for i, F in enumerate(C.faces) if all(C.embedding[v][0] <= 1 for v in F.verts)])
    g = greedy_collapse(C, stage, start=start)
    back = read_certificate(write_certificate(g.certificate), C)
    assert back.start == g.certificate.start and verify_certificate(back)


def test_malformed_certificate_rejected():
    C, _ = triangle_certificate()
    with pytest.raises(ValueError):
        read_certificate("source abc\ncollapse 1\n", C)
    with pytest.raises(ValueError):
        read_certificate("collapse 1 2\n", C)


def test_transfer_into_larger_complex():
    C, cert = triangle_certificate()
    big = build_complex([simplex(0, 1, 2), simplex(0, 3)])
    moved = transfer(cert, big)
    assert verify_certificate(moved)
    assert set(moved.end_faces()) == {simplex(0), simplex(3), simplex(0, 3)}


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.randoms(use_true_random=False))
def test_random_reorderings_never_verify_wrongly(n, m, rnd):
    C = grid(n, m)
    cert = greedy_collapse(C).certificate
    steps = list(cert.steps)
    rnd.shuffle(steps)
    shuffled = type(cert)(C, steps, cert.source, cert.target)
    v = verify_certificate(shuffled)
    # a shuffled sequence is valid only if every step is still an elementary collapse
    try:
        certify(C, steps)
        replayable = True
    except CertificateError:
        replayable = False
    assert bool(v) == replayable
