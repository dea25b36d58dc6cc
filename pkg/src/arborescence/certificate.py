"""Collapse certificates: ordered elementary collapses with full replay."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .complex import Complex, Face, face_set_hash

__version__ = "0.1.0"


class CertificateError(ValueError):
    """A producer emitted a sequence that does not replay."""


@dataclass
class CollapseCertificate:
    """Elementary collapses ``(free, coface)`` as canonical indices of ``complex``.

    ``start`` is the face set the collapses begin from (``None``: all of
    ``complex``).  ``source`` and ``target`` are hashes of the start and end
    face sets.
    """

    complex: Complex
    steps: list[tuple[int, int]]
    source: str
    target: str
    start: frozenset[int] | None = None
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.steps)

    def face_steps(self) -> list[tuple[Face, Face]]:
        return [(self.complex.faces[a], self.complex.faces[b]) for a, b in self.steps]

    def start_members(self) -> set[int]:
        return set(range(len(self.complex))) if self.start is None else set(self.start)

    def end_members(self) -> set[int]:
        alive = self.start_members()
        for a, b in self.steps:
            alive.discard(a)
            alive.discard(b)
        return alive

    def end_faces(self) -> list[Face]:
        return [self.complex.faces[i] for i in sorted(self.end_members())]

    def then(self, other: CollapseCertificate) -> CollapseCertificate:
        """Concatenation; ``other`` must start where this one ends."""
        if other.complex is not self.complex or other.source != self.target:
            raise CertificateError("certificates do not chain")
        return CollapseCertificate(self.complex, self.steps + other.steps, self.source,
                                   other.target, self.start, {**self.meta, **other.meta})


@dataclass(frozen=True)
class Verdict:
    valid: bool
    step: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.valid


class Replay:
    """Incremental face-set state supporting O(degree) freeness tests."""

    def __init__(self, C: Complex, members: Iterable[int] | None = None):
        self.C = C
        self.alive = set(range(len(C))) if members is None else set(members)
        self.ops = 0

    def up(self, i: int) -> list[int]:
        self.ops += 1
        return [j for j in self.C.cofacets_of[i] if j in self.alive]

    def coface_if_free(self, i: int) -> int | None:
        """The unique strict coface of alive face ``i``, or None."""
        up = self.up(i)
        if len(up) != 1:
            return None
        j = up[0]
        if any(k in self.alive for k in self.C.cofacets_of[j]):
            return None
        return j

    def check(self, a: int, b: int) -> str | None:
        C = self.C
        if a not in self.alive:
            return f"face {a} already removed"
        if b not in self.alive:
            return f"coface {b} already removed"
        if a not in C.facets_of[b]:
            return f"face {a} is not a facet of {b}"
        if self.coface_if_free(a) != b:
            return f"face {a} is not free with coface {b}"
        return None

    def remove(self, a: int, b: int) -> None:
        self.alive.discard(a)
        self.alive.discard(b)


def set_hash(C: Complex, members: Iterable[int]) -> str:
    return face_set_hash(C.faces[i] for i in members)


def certify(C: Complex, steps: Sequence[tuple[int, int]], start: Iterable[int] | None = None,
            **meta) -> CollapseCertificate:
    """Replay ``steps`` and wrap them; raises :class:`CertificateError` if any step fails."""
    st = frozenset(start) if start is not None else None
    r = Replay(C, st)
    source = set_hash(C, r.alive)
    for k, (a, b) in enumerate(steps):
        why = r.check(a, b)
        if why:
            raise CertificateError(f"step {k}: {why}")
        r.remove(a, b)
    return CollapseCertificate(C, [tuple(map(int, s)) for s in steps], source,
                               set_hash(C, r.alive), st, dict(meta))


def certify_faces(C: Complex, face_steps: Iterable[tuple[Face, Face]], start=None, **meta) -> CollapseCertificate:
    return certify(C, [(C.index[a], C.index[b]) for a, b in face_steps], start, **meta)


def verify_certificate(cert: CollapseCertificate, C: Complex | None = None,
                       start: Iterable[int] | None = None) -> Verdict:
    """Replay ``cert`` on ``C`` (default: its own complex) from ``start``.

    Checks the source hash, freeness at every step and the target hash.
    """
    C = cert.complex if C is None else C
    if start is None:
        start = cert.start
    r = Replay(C, start)
    if set_hash(C, r.alive) != cert.source:
        return Verdict(False, None, "source hash mismatch")
    for k, (a, b) in enumerate(cert.steps):
        if not (0 <= a < len(C) and 0 <= b < len(C)):
            return Verdict(False, k, "face index out of range")
        why = r.check(a, b)
        if why:
            return Verdict(False, k, why)
        r.remove(a, b)
    if set_hash(C, r.alive) != cert.target:
        return Verdict(False, len(cert.steps), "end state differs from target")
    return Verdict(True)


def transfer(cert: CollapseCertificate, C: Complex, start: Iterable[int] | None = None,
             **meta) -> CollapseCertificate:
    """Replay the same face-level steps inside another complex ``C``."""
    return certify_faces(C, cert.face_steps(), start, **{**cert.meta, **meta})


def write_certificate(cert: CollapseCertificate, header: dict | None = None) -> str:
    lines = [f"# arborescence {__version__}"]
    for k, v in (header or {}).items():
        lines.append(f"# {k} {v}")
    lines.append(f"source {cert.source}")
    lines.append(f"target {cert.target}")
    if cert.start is not None:
        lines.append("start " + " ".join(map(str, sorted(cert.start))))
    lines += [f"collapse {a} {b}" for a, b in cert.steps]
    return "\n".join(lines) + "\n"


def read_certificate(text: str, C: Complex, start: Iterable[int] | None = None) -> CollapseCertificate:
    """Parse a certificate file against ``C``; replay is left to :func:`verify_certificate`.

    An explicit ``start`` overrides a ``start`` record in the text.
    """
    source = target = None
    steps = []
    declared = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.split()
        if tok[0] == "source" and len(tok) == 2:
            source = tok[1]
        elif tok[0] == "target" and len(tok) == 2:
            target = tok[1]
        elif tok[0] == "start":
            declared = frozenset(int(x) for x in tok[1:])
        elif tok[0] == "collapse" and len(tok) == 3:
            steps.append((int(tok[1]), int(tok[2])))
        else:
            raise ValueError(f"line {lineno}: unrecognised record {line!r}")
    if source is None or target is None:
        raise ValueError("certificate lacks source/target header")
    st = frozenset(start) if start is not None else declared
    return CollapseCertificate(C, steps, source, target, st)
