"""Graded generators, formal integer chains and validated boundary specs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Iterator, Mapping

KINDS = ("cube-face", "cell", "moduli-component", "fibered-product-component")


class UnknownGenerator(KeyError):
    def __init__(self, gid: object):
        super().__init__(f"UnknownGenerator: {gid!r}")
        self.gid = gid


@dataclass(frozen=True)
class GeneratorId:
    key: Hashable
    degree: int
    kind: str = "cell"

    def __post_init__(self) -> None:
        if self.degree < 0:
            raise ValueError(f"negative degree {self.degree}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")


class FormalChain(Mapping):
    """Finite integer combination of generators; zero coefficients are never stored.

    The degree of the zero chain is whatever the caller says it is.
    """

    __slots__ = ("_terms", "degree")

    def __init__(self, terms: Mapping | Iterable | None = None, degree: int | None = None):
        acc: dict = {}
        items = terms.items() if isinstance(terms, Mapping) else (terms or ())
        for g, c in items:
            acc[g] = acc.get(g, 0) + c
        self._terms = {g: c for g, c in acc.items() if c}
        self.degree = degree

    @classmethod
    def single(cls, g: Hashable, coeff: int = 1, degree: int | None = None) -> "FormalChain":
        return cls({g: coeff}, degree)

    def __getitem__(self, g: Hashable) -> int:
        return self._terms.get(g, 0)

    def __iter__(self) -> Iterator:
        return iter(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __contains__(self, g: object) -> bool:
        return g in self._terms

    def __eq__(self, other: object) -> bool:
        if isinstance(other, FormalChain):
            return self._terms == other._terms
        if isinstance(other, Mapping):
            return self._terms == {g: c for g, c in other.items() if c}
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "0"
        body = " ".join(f"{c:+d}*{g!r}" for g, c in sorted(self._terms.items(), key=lambda t: repr(t[0])))
        return f"FormalChain({body})"

    def _deg(self, other: "FormalChain") -> int | None:
        return self.degree if self.degree is not None else other.degree

    def __add__(self, other: "FormalChain") -> "FormalChain":
        out = dict(self._terms)
        for g, c in other._terms.items():
            out[g] = out.get(g, 0) + c
        return FormalChain(out, self._deg(other))

    def __neg__(self) -> "FormalChain":
        return FormalChain({g: -c for g, c in self._terms.items()}, self.degree)

    def __sub__(self, other: "FormalChain") -> "FormalChain":
        return self + (-other)

    def __mul__(self, k: int) -> "FormalChain":
        return FormalChain({g: k * c for g, c in self._terms.items()}, self.degree)

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not self._terms

    def map_keys(self, f) -> "FormalChain":
        out: dict = {}
        for g, c in self._terms.items():
            h = f(g)
            out[h] = out.get(h, 0) + c
        return FormalChain(out, self.degree)

    def sorted_items(self) -> list[tuple[Hashable, int]]:
        return sorted(self._terms.items(), key=lambda t: _sort_key(t[0]))


def _sort_key(g: object):
    if isinstance(g, tuple):
        return ("tuple", tuple(_sort_key(x) for x in g))
    if isinstance(g, GeneratorId):
        return ("gen", (g.degree, _sort_key(g.key)))
    if isinstance(g, int):
        return ("int", g)
    return (type(g).__name__, str(g))


def chain_sum(chains: Iterable[FormalChain], degree: int | None = None) -> FormalChain:
    out: dict = {}
    for ch in chains:
        for g, c in ch.items():
            out[g] = out.get(g, 0) + c
        if degree is None:
            degree = ch.degree
    return FormalChain(out, degree)


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, msg: str) -> None:
        self.violations.append(msg)

    def extend(self, other: "ValidationReport") -> "ValidationReport":
        self.violations.extend(other.violations)
        return self

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        return "OK" if self.ok else "\n".join(self.violations)


@dataclass
class BoundarySpec:
    """Face lists: generator -> [(sign, face generator)], faces one degree lower."""

    face_list: dict[GeneratorId, list[tuple[int, GeneratorId]]]

    def generators(self, degree: int | None = None) -> list[GeneratorId]:
        return sorted((g for g in self.face_list if degree is None or g.degree == degree), key=_sort_key)


def chain_boundary(c: FormalChain, b: BoundarySpec) -> FormalChain:
    out: dict = {}
    for g, coeff in c.items():
        if g not in b.face_list:
            raise UnknownGenerator(g)
        for sign, face in b.face_list[g]:
            out[face] = out.get(face, 0) + coeff * sign
    deg = None if c.degree is None else c.degree - 1
    if deg is None and c:
        deg = next(iter(c)).degree - 1
    return FormalChain(out, deg)


def validate_boundary_spec(b: BoundarySpec) -> ValidationReport:
    report = ValidationReport()
    for g, faces in b.face_list.items():
        if g.degree == 0 and faces:
            report.add(f"{g!r}: degree-0 generator has faces")
        for sign, face in faces:
            if face.degree != g.degree - 1:
                report.add(f"{g!r}: face {face!r} has degree {face.degree}, expected {g.degree - 1}")
            if sign not in (1, -1):
                report.add(f"{g!r}: coefficient {sign} on {face!r} is not +1 or -1")
    for g in b.face_list:
        try:
            dd = chain_boundary(chain_boundary(FormalChain.single(g, degree=g.degree), b), b)
        except UnknownGenerator as e:
            report.add(f"{g!r}: face {e.gid!r} has no boundary entry")
            continue
        if dd:
            report.add(f"{g!r}: boundary of boundary is {dd!r}")
    return report
