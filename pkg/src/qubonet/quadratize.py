"""Degree reduction of unit-basis polynomials by iterated pair substitution.

A product x*y of two 0/1 variables is replaced by a fresh auxiliary variable
z together with the penalty

    Q(z; x, y) = lam * (x*y - 2*z*x - 2*z*y + 3*z)

which is zero when z == x*y and at least ``lam`` otherwise.  Repeating the
substitution until every monomial has degree <= 2 yields a quadratic
polynomial whose minima project onto the minima of the original.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .polynomial import Basis, MultilinearPoly, PolyParseError
from .qubo import QuboModel
from .solvers import exact_solve

# Minimum penalty weight; the adaptive rule never goes below this.
MIN_LAMBDA = 1.0


def constraint_gadget(z: int, x: int, y: int, lam: float) -> MultilinearPoly:
    """Penalty enforcing z == x*y on 0/1 variables.

    Evaluates to 0 whenever z == x*y and to lam, 3*lam, or lam on the three
    violating rows, so any lam > 0 makes the constraint rows strictly worse.
    """
    if len({x, y, z}) != 3:
        raise ValueError("gadget variables must be distinct")
    if lam <= 0:
        raise ValueError("lam must be positive")
    terms = {
        tuple(sorted((x, y))): lam,
        tuple(sorted((z, x))): -2.0 * lam,
        tuple(sorted((z, y))): -2.0 * lam,
        (z,): 3.0 * lam,
    }
    return MultilinearPoly(Basis.UNIT, terms)


@dataclass(frozen=True)
class ReductionEntry:
    """One substitution: ``aux`` replaces the product ``parent_a * parent_b``."""

    aux: int
    parent_a: int
    parent_b: int
    lam: float

    def __post_init__(self) -> None:
        if len({self.aux, self.parent_a, self.parent_b}) != 3:
            raise ValueError("aux and parents must be distinct variables")


@dataclass(frozen=True)
class ReductionMap:
    """Ordered substitution record; later entries may reference earlier aux."""

    entries: tuple[ReductionEntry, ...] = ()

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for e in self.entries:
            if e.aux in seen:
                raise ValueError(f"aux variable {e.aux} defined twice")
            seen.add(e.aux)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def aux_variables(self) -> list[int]:
        return [e.aux for e in self.entries]


def lift_assignment(
    rmap: ReductionMap, original: Mapping[int, int]
) -> dict[int, int]:
    """Extend an assignment of the original variables with consistent aux values.

    Entries are applied in order, so an entry may consume the aux of an
    earlier one.  Raises ValueError when a parent is not yet assigned.
    """
    full = dict(original)
    for e in rmap.entries:
        try:
            a, b = full[e.parent_a], full[e.parent_b]
        except KeyError as exc:
            raise ValueError(
                f"cannot lift: parent variable {exc.args[0]} of aux "
                f"{e.aux} is unassigned"
            ) from None
        full[e.aux] = a * b
    return full


@dataclass(frozen=True)
class QuadratizedModel:
    """A degree <= 2 polynomial plus the map that produced it."""

    quadratic: MultilinearPoly
    reduction: ReductionMap
    original_var_count: int

    def __post_init__(self) -> None:
        if self.quadratic.basis is not Basis.UNIT:
            raise ValueError("quadratized model must be in the unit basis")
        if self.quadratic.degree > 2:
            raise ValueError("quadratized polynomial has degree > 2")

    @property
    def n_aux(self) -> int:
        return len(self.reduction)

    @property
    def n_vars(self) -> int:
        return self.original_var_count + len(self.reduction)

    def lift(self, original: Mapping[int, int]) -> dict[int, int]:
        return lift_assignment(self.reduction, original)

    def to_text(self) -> str:
        lines = [self.quadratic.to_text().rstrip("\n")]
        lines.append(f"#original_vars: {self.original_var_count}")
        lines.append("#reduction")
        for e in self.reduction.entries:
            lines.append(f"{e.aux} {e.parent_a} {e.parent_b} {e.lam!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "QuadratizedModel":
        head: list[str] = []
        tail: list[tuple[int, str]] = []
        original_vars: int | None = None
        in_reduction = False
        for no, raw in enumerate(text.splitlines(), start=1):
            stripped = raw.strip()
            if stripped == "#reduction":
                in_reduction = True
                continue
            if stripped.startswith("#original_vars:"):
                try:
                    original_vars = int(stripped.split(":", 1)[1])
                except ValueError:
                    raise PolyParseError(
                        f"line {no}: bad #original_vars value", line_no=no
                    ) from None
                continue
            if in_reduction:
                if stripped:
                    tail.append((no, stripped))
            else:
                head.append(raw)
        poly = MultilinearPoly.from_text("\n".join(head))
        entries = []
        for no, line in tail:
            parts = line.split()
            if len(parts) != 4:
                raise PolyParseError(
                    f"line {no}: reduction entries need 4 fields, got {len(parts)}",
                    line_no=no,
                )
            try:
                aux, pa, pb = (int(p) for p in parts[:3])
                lam = float(parts[3])
            except ValueError:
                raise PolyParseError(
                    f"line {no}: cannot parse reduction entry {line!r}", line_no=no
                ) from None
            entries.append(ReductionEntry(aux, pa, pb, lam))
        rmap = ReductionMap(tuple(entries))
        if original_vars is None:
            aux_set = set(rmap.aux_variables())
            plain = [v for v in poly.variables() if v not in aux_set]
            original_vars = max(plain) + 1 if plain else 0
        return cls(poly, rmap, original_vars)


def _pair_counts(poly: MultilinearPoly) -> Counter:
    counts: Counter = Counter()
    for mono in poly.terms:
        if len(mono) >= 3:
            counts.update(itertools.combinations(mono, 2))
    return counts


def _payload_lambda(poly: MultilinearPoly) -> float:
    total = sum(abs(c) for m, c in poly.terms.items() if m)
    return MIN_LAMBDA + total


def quadratize(
    poly: MultilinearPoly, lam: float | None = None
) -> QuadratizedModel:
    """Reduce a unit-basis polynomial to degree <= 2.

    Pairs are chosen greedily by how many degree >= 3 monomials they appear
    in, ties broken lexicographically.  With lam=None each substitution gets
    the adaptive weight 1 + sum(|c|) over the non-constant work terms at that
    step, which is always enough to make constraint violations unprofitable;
    an explicit lam overrides this for every substitution.
    """
    if poly.basis is not Basis.UNIT:
        raise ValueError("quadratize expects a unit-basis polynomial")
    if lam is not None and lam <= 0:
        raise ValueError("lam must be positive")

    variables = poly.variables()
    original_var_count = (max(variables) + 1) if variables else 0
    next_aux = original_var_count

    work = poly
    penalty = MultilinearPoly.zero(Basis.UNIT)
    entries: list[ReductionEntry] = []

    while work.degree > 2:
        counts = _pair_counts(work)
        # max count first, then smallest (a, b)
        pair, _ = min(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        x, y = pair
        z = next_aux
        next_aux += 1
        step_lam = lam if lam is not None else _payload_lambda(work)
        entries.append(ReductionEntry(z, x, y, step_lam))
        work = work.substitute_pair(x, y, z)
        penalty = penalty + constraint_gadget(z, x, y, step_lam)

    return QuadratizedModel(
        quadratic=work + penalty,
        reduction=ReductionMap(tuple(entries)),
        original_var_count=original_var_count,
    )


@dataclass
class ReductionReport:
    """Outcome of an exhaustive check that a reduction is faithful."""

    passed: bool
    min_energy_original: float
    min_energy_reduced: float
    n_minima_original: int
    n_minima_reduced: int
    message: str = ""
    counterexample: dict[int, int] | None = None


def _bit_table(n: int) -> np.ndarray:
    ks = np.arange(1 << n, dtype=np.int64)
    return ((ks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


def verify_reduction(
    poly: MultilinearPoly,
    model: QuadratizedModel,
    max_vars: int = 22,
    tol: float = 1e-9,
) -> ReductionReport:
    """Exhaustively check that ``model`` is a faithful reduction of ``poly``.

    Checks three things: equal minimum values, equal minimizer sets after
    projecting out the aux variables, and the energy identity at every
    lifted assignment.  Refuses models with more than ``max_vars`` total
    variables; spot-check those with sampled assignments instead.
    """
    if poly.basis is not Basis.UNIT:
        raise ValueError("verify_reduction expects a unit-basis polynomial")
    n_orig = model.original_var_count
    n_total = model.n_vars
    if n_total > max_vars:
        raise ValueError(
            f"model has {n_total} variables, above the exhaustive limit of "
            f"{max_vars}; use sampled lifted assignments for a spot check"
        )

    orig_order = list(range(n_orig))
    B = _bit_table(n_orig)
    p_vals = poly.evaluate_batch(B, var_order=orig_order)
    p_min = float(p_vals.min()) if p_vals.size else poly.constant_term
    orig_minima = {
        tuple(int(b) for b in row) for row in B[p_vals <= p_min + tol]
    }

    # lifted energies: aux columns are products of parent columns
    cols: dict[int, np.ndarray] = {i: B[:, i] for i in range(n_orig)}
    for e in model.reduction.entries:
        cols[e.aux] = cols[e.parent_a] * cols[e.parent_b]
    lifted = np.column_stack([cols[i] for i in range(n_total)]) if n_total else B
    q_order = list(range(n_total))
    lifted_vals = model.quadratic.evaluate_batch(lifted, var_order=q_order)
    gap = np.abs(lifted_vals - p_vals)
    if gap.size and float(gap.max()) > tol:
        k = int(np.argmax(gap))
        bad = {i: int(B[k, i]) for i in range(n_orig)}
        return ReductionReport(
            passed=False,
            min_energy_original=p_min,
            min_energy_reduced=float("nan"),
            n_minima_original=len(orig_minima),
            n_minima_reduced=0,
            message=(
                f"energy identity fails at a lifted point by {float(gap.max()):.3g}"
            ),
            counterexample=bad,
        )

    q_model = QuboModel.from_poly(model.quadratic, n_vars=n_total)
    q_min, q_assignments = exact_solve(q_model, max_vars=max_vars)
    red_minima = {a[:n_orig] for a in q_assignments}

    if abs(q_min - p_min) > tol:
        return ReductionReport(
            passed=False,
            min_energy_original=p_min,
            min_energy_reduced=q_min,
            n_minima_original=len(orig_minima),
            n_minima_reduced=len(red_minima),
            message=f"minimum mismatch: original {p_min!r}, reduced {q_min!r}",
        )
    if red_minima != orig_minima:
        extra = red_minima - orig_minima
        missing = orig_minima - red_minima
        bad_t = next(iter(extra or missing))
        return ReductionReport(
            passed=False,
            min_energy_original=p_min,
            min_energy_reduced=q_min,
            n_minima_original=len(orig_minima),
            n_minima_reduced=len(red_minima),
            message=(
                f"minimizer sets differ: {len(extra)} spurious, "
                f"{len(missing)} missing"
            ),
            counterexample={i: v for i, v in enumerate(bad_t)},
        )
    return ReductionReport(
        passed=True,
        min_energy_original=p_min,
        min_energy_reduced=q_min,
        n_minima_original=len(orig_minima),
        n_minima_reduced=len(red_minima),
        message="ok",
    )
