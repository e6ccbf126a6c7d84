"""Quadratic unconstrained binary optimization models over 0/1 variables.

E(b) = offset + sum_i h_i b_i + sum_{i<j} J_ij b_i b_j
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .polynomial import Basis, MultilinearPoly, PolyParseError

COEF_TOL = 1e-15


def _clean(value: float) -> float:
    return float(value)


@dataclass(frozen=True)
class QuboModel:
    """Sparse QUBO with linear terms, upper-triangular couplings, and offset."""

    n_vars: int
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    offset: float = 0.0

    def __post_init__(self) -> None:
        if self.n_vars < 0:
            raise ValueError("n_vars must be non-negative")
        lin = {}
        for i, v in self.linear.items():
            i = int(i)
            if not 0 <= i < self.n_vars:
                raise ValueError(f"linear index {i} out of range")
            if abs(v) > COEF_TOL:
                lin[i] = float(v)
        quad = {}
        for (i, j), v in self.quadratic.items():
            i, j = int(i), int(j)
            if not (0 <= i < j < self.n_vars):
                raise ValueError(f"coupling ({i}, {j}) must satisfy 0 <= i < j < n_vars")
            if abs(v) > COEF_TOL:
                quad[(i, j)] = float(v)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)
        object.__setattr__(self, "offset", float(self.offset))

    # -- energies ---------------------------------------------------------

    def energy(self, bits: Sequence[int]) -> float:
        if len(bits) != self.n_vars:
            raise ValueError(f"expected {self.n_vars} bits, got {len(bits)}")
        e = self.offset
        for i, h in self.linear.items():
            e += h * bits[i]
        for (i, j), c in self.quadratic.items():
            e += c * bits[i] * bits[j]
        return float(e)

    def energy_batch(self, bits: np.ndarray) -> np.ndarray:
        """Energies for each row of an (m, n_vars) 0/1 array."""
        B = np.asarray(bits, dtype=np.float64)
        if B.ndim != 2 or B.shape[1] != self.n_vars:
            raise ValueError(f"expected shape (m, {self.n_vars})")
        out = np.full(B.shape[0], self.offset, dtype=np.float64)
        if self.linear:
            h = np.zeros(self.n_vars)
            for i, v in self.linear.items():
                h[i] = v
            out += B @ h
        if self.quadratic:
            U = np.zeros((self.n_vars, self.n_vars))
            for (i, j), v in self.quadratic.items():
                U[i, j] = v
            out += np.einsum("mi,ij,mj->m", B, U, B, optimize=True)
        return out

    def dense(self) -> tuple[np.ndarray, np.ndarray, float]:
        """(h, U, offset) with U strictly upper triangular."""
        h = np.zeros(self.n_vars)
        for i, v in self.linear.items():
            h[i] = v
        U = np.zeros((self.n_vars, self.n_vars))
        for (i, j), v in self.quadratic.items():
            U[i, j] = v
        return h, U, self.offset

    # -- conversions ------------------------------------------------------

    @classmethod
    def from_poly(cls, poly: MultilinearPoly, n_vars: int | None = None) -> "QuboModel":
        if poly.basis is not Basis.UNIT:
            raise ValueError("QUBO construction needs a unit-basis polynomial")
        if poly.degree > 2:
            raise ValueError("polynomial has degree > 2; quadratize first")
        variables = poly.variables()
        needed = (max(variables) + 1) if variables else 0
        if n_vars is None:
            n_vars = needed
        elif n_vars < needed:
            raise ValueError(f"n_vars={n_vars} too small for variable {needed - 1}")
        offset = 0.0
        linear: dict[int, float] = {}
        quadratic: dict[tuple[int, int], float] = {}
        for mono, c in poly.terms.items():
            if len(mono) == 0:
                offset = c
            elif len(mono) == 1:
                linear[mono[0]] = c
            else:
                quadratic[(mono[0], mono[1])] = c
        return cls(n_vars=n_vars, linear=linear, quadratic=quadratic, offset=offset)

    def to_poly(self) -> MultilinearPoly:
        terms: dict[tuple[int, ...], float] = {}
        if self.offset:
            terms[()] = self.offset
        for i, v in self.linear.items():
            terms[(i,)] = v
        for key, v in self.quadratic.items():
            terms[key] = v
        return MultilinearPoly(Basis.UNIT, terms)

    def to_spin_poly(self) -> MultilinearPoly:
        return self.to_poly().to_spin()

    @classmethod
    def from_spin_poly(
        cls, poly: MultilinearPoly, n_vars: int | None = None
    ) -> "QuboModel":
        if poly.basis is not Basis.SPIN:
            raise ValueError("expected a spin-basis polynomial")
        return cls.from_poly(poly.to_unit(), n_vars=n_vars)

    # -- text format ------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"# n_vars={self.n_vars} offset={self.offset!r}"]
        for i in sorted(self.linear):
            lines.append(f"{i} {i} {self.linear[i]!r}")
        for i, j in sorted(self.quadratic):
            lines.append(f"{i} {j} {self.quadratic[(i, j)]!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QuboModel":
        n_vars: int | None = None
        offset = 0.0
        linear: dict[int, float] = {}
        quadratic: dict[tuple[int, int], float] = {}
        max_seen = -1
        for no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                for token in body.split():
                    if token.startswith("n_vars="):
                        try:
                            n_vars = int(token.split("=", 1)[1])
                        except ValueError:
                            raise PolyParseError(
                                f"line {no}: bad n_vars in header", line_no=no
                            ) from None
                    elif token.startswith("offset="):
                        try:
                            offset = float(token.split("=", 1)[1])
                        except ValueError:
                            raise PolyParseError(
                                f"line {no}: bad offset in header", line_no=no
                            ) from None
                continue
            parts = line.split()
            if len(parts) != 3:
                raise PolyParseError(
                    f"line {no}: expected 'i j value', got {line!r}", line_no=no
                )
            try:
                i, j = int(parts[0]), int(parts[1])
                v = float(parts[2])
            except ValueError:
                raise PolyParseError(
                    f"line {no}: cannot parse {line!r}", line_no=no
                ) from None
            if i < 0 or j < 0:
                raise PolyParseError(
                    f"line {no}: negative variable index", line_no=no
                )
            max_seen = max(max_seen, i, j)
            if i == j:
                linear[i] = linear.get(i, 0.0) + v
            else:
                a, b = min(i, j), max(i, j)
                quadratic[(a, b)] = quadratic.get((a, b), 0.0) + v
        if n_vars is None:
            n_vars = max_seen + 1
        return cls(n_vars=n_vars, linear=linear, quadratic=quadratic, offset=offset)

    # -- json -------------------------------------------------------------

    def to_doc(self) -> dict:
        return {
            "n_vars": self.n_vars,
            "offset": self.offset,
            "linear": {str(i): v for i, v in sorted(self.linear.items())},
            "quadratic": {
                f"{i} {j}": v for (i, j), v in sorted(self.quadratic.items())
            },
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "QuboModel":
        linear = {int(k): float(v) for k, v in doc.get("linear", {}).items()}
        quadratic = {}
        for key, v in doc.get("quadratic", {}).items():
            i, j = (int(p) for p in str(key).split())
            quadratic[(min(i, j), max(i, j))] = float(v)
        return cls(
            n_vars=int(doc["n_vars"]),
            linear=linear,
            quadratic=quadratic,
            offset=float(doc.get("offset", 0.0)),
        )
