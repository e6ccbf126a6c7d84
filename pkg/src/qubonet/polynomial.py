"""Sparse multilinear polynomials over binary-valued variables.

A polynomial lives in one of two bases: SPIN, where every variable takes
values in {-1, +1} and squares to 1, or UNIT, where values are {0, 1} and
squares are idempotent.  Terms are stored as a dict mapping a monomial (a
strictly increasing tuple of variable indices) to its real coefficient.
The empty tuple is the constant term.  The two bases are linked by
tau = (sigma + 1) / 2, and conversion either way is exact for the dyadic
coefficients that arise in practice.
"""

from __future__ import annotations

import enum
from typing import Iterable, Mapping

import numpy as np

EQ_TOL = 1e-12     # coefficient tolerance for approx_eq
PRUNE_TOL = 1e-15  # coefficients at or below this magnitude are dropped

Monomial = tuple[int, ...]


class Basis(enum.Enum):
    SPIN = "spin"
    UNIT = "unit"


class PolyParseError(ValueError):
    """Raised when polynomial text cannot be parsed; carries the line number."""

    def __init__(self, line_no: int, message: str):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


def _as_monomial(key: Iterable[int]) -> Monomial:
    mono = tuple(key)
    for i in mono:
        if not isinstance(i, (int, np.integer)) or i < 0:
            raise ValueError(f"variable indices must be non-negative integers, got {i!r}")
    if any(mono[k] >= mono[k + 1] for k in range(len(mono) - 1)):
        srt = tuple(sorted(mono))
        if len(set(srt)) != len(srt):
            raise ValueError(f"monomial {mono} repeats a variable; polynomials are multilinear")
        mono = srt
    return tuple(int(i) for i in mono)


class MultilinearPoly:
    """Immutable multilinear polynomial; all operations return new values."""

    __slots__ = ("basis", "terms")

    def __init__(self, basis: Basis, terms: Mapping[Iterable[int], float] | None = None):
        clean: dict[Monomial, float] = {}
        for key, coeff in (terms or {}).items():
            mono = _as_monomial(key)
            clean[mono] = clean.get(mono, 0.0) + float(coeff)
        self.basis = basis
        self.terms = {m: c for m, c in clean.items() if abs(c) > PRUNE_TOL}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, basis: Basis) -> MultilinearPoly:
        return cls(basis, {})

    @classmethod
    def constant(cls, basis: Basis, value: float) -> MultilinearPoly:
        return cls(basis, {(): value})

    @classmethod
    def variable(cls, basis: Basis, index: int) -> MultilinearPoly:
        return cls(basis, {(index,): 1.0})

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def variables(self) -> set[int]:
        out: set[int] = set()
        for m in self.terms:
            out.update(m)
        return out

    @property
    def constant_term(self) -> float:
        return self.terms.get((), 0.0)

    def coefficient(self, key: Iterable[int]) -> float:
        return self.terms.get(_as_monomial(key), 0.0)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MultilinearPoly)
            and self.basis == other.basis
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.basis, frozenset(self.terms.items())))

    def approx_eq(self, other: MultilinearPoly, tol: float = EQ_TOL) -> bool:
        if self.basis != other.basis:
            return False
        for m in self.terms.keys() | other.terms.keys():
            if abs(self.terms.get(m, 0.0) - other.terms.get(m, 0.0)) > tol:
                return False
        return True

    def __repr__(self) -> str:
        if not self.terms:
            body = "0"
        else:
            sym = "s" if self.basis is Basis.SPIN else "t"
            parts = []
            for m in sorted(self.terms, key=lambda k: (len(k), k)):
                factors = "".join(f"{sym}{i}" for i in m) or "1"
                parts.append(f"{self.terms[m]:+g}*{factors}")
            body = " ".join(parts)
        return f"MultilinearPoly({self.basis.value}: {body})"

    # -- arithmetic --------------------------------------------------------

    def _require_same_basis(self, other: MultilinearPoly) -> None:
        if self.basis != other.basis:
            raise ValueError(f"basis mismatch: {self.basis.value} vs {other.basis.value}")

    def __add__(self, other: MultilinearPoly | float) -> MultilinearPoly:
        if not isinstance(other, MultilinearPoly):
            other = MultilinearPoly.constant(self.basis, float(other))
        self._require_same_basis(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0.0) + c
        return MultilinearPoly(self.basis, out)

    __radd__ = __add__

    def __neg__(self) -> MultilinearPoly:
        return MultilinearPoly(self.basis, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: MultilinearPoly | float) -> MultilinearPoly:
        if not isinstance(other, MultilinearPoly):
            other = MultilinearPoly.constant(self.basis, float(other))
        return self + (-other)

    def __rsub__(self, other: float) -> MultilinearPoly:
        return MultilinearPoly.constant(self.basis, float(other)) + (-self)

    def __mul__(self, other: MultilinearPoly | float) -> MultilinearPoly:
        if not isinstance(other, MultilinearPoly):
            c = float(other)
            return MultilinearPoly(self.basis, {m: v * c for m, v in self.terms.items()})
        self._require_same_basis(other)
        unit = self.basis is Basis.UNIT
        out: dict[Monomial, float] = {}
        for ma, ca in self.terms.items():
            sa = set(ma)
            for mb, cb in other.terms.items():
                if unit:
                    mono = tuple(sorted(sa | set(mb)))  # tau^2 = tau
                else:
                    mono = tuple(sorted(sa ^ set(mb)))  # sigma^2 = 1
                out[mono] = out.get(mono, 0.0) + ca * cb
        return MultilinearPoly(self.basis, out)

    __rmul__ = __mul__

    # -- evaluation --------------------------------------------------------

    def evaluate(self, assignment: Mapping[int, float]) -> float:
        alphabet = (0, 1) if self.basis is Basis.UNIT else (-1, 1)
        missing = self.variables() - set(assignment)
        if missing:
            raise ValueError(f"assignment missing variables {sorted(missing)}")
        for i in self.variables():
            if assignment[i] not in alphabet:
                raise ValueError(
                    f"value {assignment[i]!r} for variable {i} not in {alphabet} "
                    f"({self.basis.value} basis)"
                )
        total = 0.0
        for m, c in self.terms.items():
            v = c
            for i in m:
                v *= assignment[i]
            total += v
        return total

    def evaluate_batch(self, values: np.ndarray, var_order: list[int] | None = None) -> np.ndarray:
        """Evaluate at many assignments at once.

        ``values`` is an (m, n) array whose column j holds the value of
        ``var_order[j]`` (default: sorted variable list) in each of the m
        assignments.  Values are not alphabet-checked here; callers supply
        valid 0/1 or +-1 matrices.
        """
        if var_order is None:
            var_order = sorted(self.variables())
        col = {v: j for j, v in enumerate(var_order)}
        vals = np.asarray(values, dtype=np.float64)
        out = np.zeros(vals.shape[0], dtype=np.float64)
        for m, c in self.terms.items():
            if not m:
                out += c
                continue
            prod = vals[:, col[m[0]]].copy()
            for i in m[1:]:
                prod *= vals[:, col[i]]
            out += c * prod
        return out

    # -- basis conversion --------------------------------------------------

    def to_unit(self) -> MultilinearPoly:
        """Rewrite a SPIN polynomial over tau = (sigma + 1) / 2 variables."""
        if self.basis is not Basis.SPIN:
            raise ValueError("to_unit expects a SPIN-basis polynomial")
        out: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            # expand prod_i (2*tau_i - 1)
            partial: dict[Monomial, float] = {(): c}
            for i in m:
                nxt: dict[Monomial, float] = {}
                for key, v in partial.items():
                    grown = tuple(sorted(key + (i,)))
                    nxt[grown] = nxt.get(grown, 0.0) + 2.0 * v
                    nxt[key] = nxt.get(key, 0.0) - v
                partial = nxt
            for key, v in partial.items():
                out[key] = out.get(key, 0.0) + v
        return MultilinearPoly(Basis.UNIT, out)

    def to_spin(self) -> MultilinearPoly:
        """Rewrite a UNIT polynomial over sigma = 2*tau - 1 variables."""
        if self.basis is not Basis.UNIT:
            raise ValueError("to_spin expects a UNIT-basis polynomial")
        out: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            # expand prod_i (sigma_i + 1) / 2
            partial: dict[Monomial, float] = {(): c}
            for i in m:
                nxt: dict[Monomial, float] = {}
                for key, v in partial.items():
                    grown = tuple(sorted(key + (i,)))
                    nxt[grown] = nxt.get(grown, 0.0) + 0.5 * v
                    nxt[key] = nxt.get(key, 0.0) + 0.5 * v
                partial = nxt
            for key, v in partial.items():
                out[key] = out.get(key, 0.0) + v
        return MultilinearPoly(Basis.SPIN, out)

    # -- pair substitution ---------------------------------------------------

    def substitute_pair(self, x: int, y: int, z: int) -> MultilinearPoly:
        """Replace {x, y} with {z} in every monomial containing both.

        Monomials holding only one of x, y are untouched.  ``z`` must be a
        fresh variable; used only in the UNIT basis where z = x*y can be
        enforced with a quadratic penalty.
        """
        if self.basis is not Basis.UNIT:
            raise ValueError("substitute_pair expects a UNIT-basis polynomial")
        if z in self.variables():
            raise ValueError(f"replacement variable {z} already appears in the polynomial")
        if x == y:
            raise ValueError("pair variables must be distinct")
        out: dict[Monomial, float] = {}
        for m, c in self.terms.items():
            if x in m and y in m:
                m = tuple(sorted(set(m) - {x, y} | {z}))
            out[m] = out.get(m, 0.0) + c
        return MultilinearPoly(Basis.UNIT, out)

    # -- text form -----------------------------------------------------------

    def to_text(self) -> str:
        """One term per line: ``coeff i1 i2 ... ik``; repr floats round-trip."""
        lines = [f"#basis: {self.basis.value}"]
        for m in sorted(self.terms, key=lambda k: (len(k), k)):
            lines.append(" ".join([repr(self.terms[m])] + [str(i) for i in m]))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> MultilinearPoly:
        basis: Basis | None = None
        terms: dict[Monomial, float] = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("basis:"):
                    name = body.split(":", 1)[1].strip()
                    try:
                        basis = Basis(name)
                    except ValueError:
                        raise PolyParseError(line_no, f"unknown basis {name!r}") from None
                continue
            parts = line.split()
            try:
                coeff = float(parts[0])
            except ValueError:
                raise PolyParseError(line_no, f"bad coefficient {parts[0]!r}") from None
            try:
                mono = _as_monomial(int(p) for p in parts[1:])
            except ValueError as exc:
                raise PolyParseError(line_no, str(exc)) from None
            if basis is None:
                raise PolyParseError(line_no, "term before '#basis:' header")
            terms[mono] = terms.get(mono, 0.0) + coeff
        if basis is None:
            raise PolyParseError(1, "missing '#basis: spin|unit' header")
        return cls(basis, terms)
