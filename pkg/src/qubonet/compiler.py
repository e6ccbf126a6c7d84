"""Compile the MSE training loss of the binary-encoded network into a QUBO.

Two routes produce the same minima: the structured path substitutes the
specific product families that appear in the network output (v*w bit pairs,
w*w' bit pairs, and v*w*w' triples) so the output becomes linear in bits
before squaring the residual; the generic path expands the loss and hands it
to the general quadratizer.
"""

from __future__ import annotations

import hashlib
import itertools
import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .network import (
    FeatureScaler,
    LayoutEntry,
    NetworkShape,
    ParamLayout,
    TrainedNetwork,
    build_layout,
    encoding_affine,
    weight_columns,
)
from .polynomial import Basis, MultilinearPoly
from .quadratize import (
    ReductionEntry,
    ReductionMap,
    constraint_gadget,
    quadratize,
)
from .qubo import QuboModel

STRUCTURED = "structured"
GENERIC = "generic"


def _as_xy(dataset) -> tuple[np.ndarray, np.ndarray]:
    if hasattr(dataset, "features"):
        features, labels = dataset.features, dataset.labels
    else:
        features, labels = dataset
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("dataset must be non-empty with 2-D features")
    if y.shape != (X.shape[0],):
        raise ValueError("labels must match the feature rows")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must take values -1 or +1")
    return X, y


def _param_poly(entry: LayoutEntry) -> MultilinearPoly:
    base, scales = encoding_affine(entry.encoding, entry.n_bits)
    terms: dict[tuple[int, ...], float] = {(): base}
    for a, s in enumerate(scales):
        terms[(entry.first_var_index + a,)] = s
    return MultilinearPoly(Basis.UNIT, terms)


def network_output_poly(
    shape: NetworkShape, x: Sequence[float], layout: ParamLayout | None = None
) -> MultilinearPoly:
    """Y(x) as a unit-basis polynomial in the parameter bits.

    Evaluating it at any bit assignment equals v.g(w.x) + v0 with the
    decoded parameters; the bias input 1 is appended internally when the
    shape has first-layer biases.
    """
    layout = layout or build_layout(shape)
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.size != shape.n_features:
        raise ValueError(f"expected {shape.n_features} features, got {xv.size}")
    xval = {j: (1.0 if j == 0 else float(xv[j - 1])) for j in weight_columns(shape)}

    out = _param_poly(layout.entry("v0"))
    coeffs = shape.activation.coeffs
    for i in range(1, shape.n_hidden + 1):
        u = MultilinearPoly.zero(Basis.UNIT)
        for j, xj in xval.items():
            u = u + xj * _param_poly(layout.entry(f"w[{i}][{j}]"))
        gu = MultilinearPoly.constant(Basis.UNIT, coeffs[0])
        upow = MultilinearPoly.constant(Basis.UNIT, 1.0)
        for c in coeffs[1:]:
            upow = upow * u
            if c:
                gu = gu + c * upow
        out = out + _param_poly(layout.entry(f"v[{i}]")) * gu
    return out


def loss_poly(
    shape: NetworkShape, dataset, layout: ParamLayout | None = None
) -> MultilinearPoly:
    """Mean squared residual (1/N) sum_a (y_a - Y(x_a))^2 over the bits.

    Features are used as given; compile_structured and compile_generic scale
    them first and store the scaler.
    """
    X, y = _as_xy(dataset)
    if X.shape[1] != shape.n_features:
        raise ValueError(f"expected {shape.n_features} features, got {X.shape[1]}")
    layout = layout or build_layout(shape)
    total = MultilinearPoly.zero(Basis.UNIT)
    for a in range(X.shape[0]):
        r = MultilinearPoly.constant(Basis.UNIT, float(y[a])) - network_output_poly(
            shape, X[a], layout
        )
        total = total + r * r
    return (1.0 / X.shape[0]) * total


@dataclass(frozen=True)
class CompiledModel:
    """A QUBO plus everything needed to decode and reproduce it."""

    shape: NetworkShape
    scaler: FeatureScaler
    layout: ParamLayout
    reduction: ReductionMap
    qubo: QuboModel
    offset: float
    counts: dict
    lam: float
    path: str

    @property
    def n_vars(self) -> int:
        return self.qubo.n_vars

    def total_energy(self, assignment: Sequence[int]) -> float:
        return self.qubo.energy(assignment) + self.offset

    def lift_bits(self, param_bits: Sequence[int]) -> tuple[int, ...]:
        """Extend parameter bits with gadget-consistent auxiliary values."""
        if len(param_bits) != self.layout.total_spins:
            raise ValueError(
                f"expected {self.layout.total_spins} parameter bits, "
                f"got {len(param_bits)}"
            )
        full = {i: int(b) for i, b in enumerate(param_bits)}
        for e in self.reduction.entries:
            full[e.aux] = full[e.parent_a] * full[e.parent_b]
        return tuple(full[i] for i in range(self.n_vars))

    def to_doc(self) -> dict:
        doc = {
            "shape": self.shape.to_doc(),
            "scaler": self.scaler.to_doc(),
            "layout": self.layout.to_doc(),
            "reduction": [
                [e.aux, e.parent_a, e.parent_b, e.lam]
                for e in self.reduction.entries
            ],
            "qubo": self.qubo.to_doc(),
            "offset": self.offset,
            "counts": dict(self.counts),
            "lambda": self.lam,
            "path": self.path,
        }
        doc["content_hash"] = content_hash(doc)
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "CompiledModel":
        reduction = ReductionMap(
            tuple(
                ReductionEntry(int(a), int(pa), int(pb), float(lm))
                for a, pa, pb, lm in doc["reduction"]
            )
        )
        return cls(
            shape=NetworkShape.from_doc(doc["shape"]),
            scaler=FeatureScaler.from_doc(doc["scaler"]),
            layout=ParamLayout.from_doc(doc["layout"]),
            reduction=reduction,
            qubo=QuboModel.from_doc(doc["qubo"]),
            offset=float(doc["offset"]),
            counts={k: int(v) for k, v in doc["counts"].items()},
            lam=float(doc["lambda"]),
            path=str(doc.get("path", STRUCTURED)),
        )


def content_hash(doc: Mapping) -> str:
    """Stable hash of a JSON-able document, ignoring any embedded hash."""
    body = {k: v for k, v in doc.items() if k != "content_hash"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def count_spins(shape: NetworkShape, path: str = STRUCTURED) -> tuple[int, int, int]:
    """(parameter bits, n_vw, n_vww); the aux counts are zero off the
    structured path, where they come from the reduction map instead."""
    abstract = build_layout(shape).total_spins
    if path != STRUCTURED:
        return abstract, 0, 0
    cols = len(weight_columns(shape))
    nb = shape.n_bits
    n_vw = (shape.n_hidden + 1) * cols * nb * nb
    n_vww = (shape.n_hidden + 1) * cols * cols * nb * nb * nb
    return abstract, n_vw, n_vww


def _ww_count(shape: NetworkShape) -> int:
    m = len(weight_columns(shape)) * shape.n_bits
    return shape.n_hidden * (m * (m - 1) // 2)


def _default_structured_lambda(loss: MultilinearPoly) -> float:
    if not loss.terms:
        return 1.0
    peak = max(abs(c) for c in loss.terms.values())
    return 2.0 * peak * len(loss.terms)


def compile_structured(
    shape: NetworkShape, dataset, lam: float | None = None
) -> CompiledModel:
    """Direct reduction for activations of degree at most two.

    Substitutes the three bit-product families of the expanded output
    (v*w, w*w' within a hidden row, and v*w*w' via the v*w aux), squares the
    now-linear residual, and adds one constraint gadget per auxiliary.  The
    v*w and v*w*w' grids are allocated for hidden rows 0..N_h, where row 0
    pairs the output-bias bits with row 1's weight bits, matching the
    closed-form counts.
    """
    if shape.activation.degree > 2:
        raise ValueError(
            "structured compilation handles activation degree <= 2; "
            "use compile_generic for higher degrees"
        )
    X_raw, y = _as_xy(dataset)
    if X_raw.shape[1] != shape.n_features:
        raise ValueError(
            f"expected {shape.n_features} features, got {X_raw.shape[1]}"
        )
    scaler = FeatureScaler.fit(X_raw)
    X = scaler.transform(X_raw)
    layout = build_layout(shape)
    cols = weight_columns(shape)
    nb = shape.n_bits

    def wbit(i: int, j: int, beta: int) -> int:
        return layout.entry(f"w[{i}][{j}]").first_var_index + beta

    def vbit(i: int, alpha: int) -> int:
        name = "v0" if i == 0 else f"v[{i}]"
        return layout.entry(name).first_var_index + alpha

    # role map for rewriting monomials of the output polynomial
    role: dict[int, tuple] = {}
    for i in range(1, shape.n_hidden + 1):
        for j in cols:
            for beta in range(nb):
                role[wbit(i, j, beta)] = ("w", i, j, beta)
        for alpha in range(nb):
            role[vbit(i, alpha)] = ("v", i, alpha)
    for alpha in range(nb):
        role[vbit(0, alpha)] = ("v0", 0, alpha)

    next_aux = layout.total_spins
    parents: list[tuple[int, int, int]] = []  # (aux, parent_a, parent_b)

    vw_aux: dict[tuple[int, int, int, int], int] = {}
    for i in range(0, shape.n_hidden + 1):
        row = max(i, 1)
        for j in cols:
            for alpha in range(nb):
                for beta in range(nb):
                    vw_aux[(i, j, alpha, beta)] = next_aux
                    parents.append((next_aux, vbit(i, alpha), wbit(row, j, beta)))
                    next_aux += 1

    vww_aux: dict[tuple[int, int, int, int, int, int], int] = {}
    for i in range(0, shape.n_hidden + 1):
        row = max(i, 1)
        for j in cols:
            for jp in cols:
                for alpha in range(nb):
                    for beta in range(nb):
                        for gamma in range(nb):
                            vww_aux[(i, j, alpha, beta, jp, gamma)] = next_aux
                            parents.append(
                                (
                                    next_aux,
                                    vw_aux[(i, j, alpha, beta)],
                                    wbit(row, jp, gamma),
                                )
                            )
                            next_aux += 1

    ww_aux: dict[tuple[int, tuple[int, int], tuple[int, int]], int] = {}
    for i in range(1, shape.n_hidden + 1):
        bits = [(j, beta) for j in cols for beta in range(nb)]
        for (j, beta), (jp, gamma) in itertools.combinations(bits, 2):
            ww_aux[(i, (j, beta), (jp, gamma))] = next_aux
            parents.append((next_aux, wbit(i, j, beta), wbit(i, jp, gamma)))
            next_aux += 1

    def rewrite(mono: tuple[int, ...]) -> tuple[int, ...]:
        if len(mono) <= 1:
            return mono
        roles = [role[t] for t in mono]
        kinds = sorted(r[0] for r in roles)
        if len(mono) == 2:
            if kinds == ["v", "w"]:
                (_, i, alpha) = next(r for r in roles if r[0] == "v")
                (_, iw, j, beta) = next(r for r in roles if r[0] == "w")
                if iw != i:
                    raise ValueError(f"cross-row product in {mono}")
                return (vw_aux[(i, j, alpha, beta)],)
            if kinds == ["w", "w"]:
                (_, i, j, beta), (_, ip, jp, gamma) = roles
                if ip != i:
                    raise ValueError(f"cross-row product in {mono}")
                if (j, beta) > (jp, gamma):
                    (j, beta), (jp, gamma) = (jp, gamma), (j, beta)
                return (ww_aux[(i, (j, beta), (jp, gamma))],)
        if len(mono) == 3 and kinds == ["v", "w", "w"]:
            (_, i, alpha) = next(r for r in roles if r[0] == "v")
            wroles = [r for r in roles if r[0] == "w"]
            if any(r[1] != i for r in wroles):
                raise ValueError(f"cross-row product in {mono}")
            (j, beta), (jp, gamma) = sorted((r[2], r[3]) for r in wroles)
            return (vww_aux[(i, j, alpha, beta, jp, gamma)],)
        raise ValueError(f"unexpected monomial structure {mono}")

    n_data = X.shape[0]
    loss = MultilinearPoly.zero(Basis.UNIT)
    for a in range(n_data):
        y_poly = network_output_poly(shape, X[a], layout)
        lin_terms: dict[tuple[int, ...], float] = {}
        for mono, c in y_poly.terms.items():
            key = rewrite(mono)
            lin_terms[key] = lin_terms.get(key, 0.0) + c
        y_lin = MultilinearPoly(Basis.UNIT, lin_terms)
        r = MultilinearPoly.constant(Basis.UNIT, float(y[a])) - y_lin
        loss = loss + r * r
    loss = (1.0 / n_data) * loss

    lam_value = float(lam) if lam is not None else _default_structured_lambda(loss)
    if lam_value <= 0:
        raise ValueError("lam must be positive")

    penalty = MultilinearPoly.zero(Basis.UNIT)
    entries = []
    for aux, pa, pb in parents:
        penalty = penalty + constraint_gadget(aux, pa, pb, lam_value)
        entries.append(ReductionEntry(aux, pa, pb, lam_value))

    H = loss + penalty
    offset = H.constant_term
    body = H - MultilinearPoly.constant(Basis.UNIT, offset)
    qubo = QuboModel.from_poly(body, n_vars=next_aux)

    counts = {
        "abstract_spins": layout.total_spins,
        "n_vw": len(vw_aux),
        "n_vww": len(vww_aux),
        "n_ww": len(ww_aux),
        "n_aux": len(entries),
    }
    exp_abstract, exp_vw, exp_vww = count_spins(shape, STRUCTURED)
    assert counts["abstract_spins"] == exp_abstract
    assert counts["n_vw"] == exp_vw and counts["n_vww"] == exp_vww
    assert counts["n_ww"] == _ww_count(shape)

    return CompiledModel(
        shape=shape,
        scaler=scaler,
        layout=layout,
        reduction=ReductionMap(tuple(entries)),
        qubo=qubo,
        offset=offset,
        counts=counts,
        lam=lam_value,
        path=STRUCTURED,
    )


def compile_generic(
    shape: NetworkShape, dataset, lam: float | None = None
) -> CompiledModel:
    """Loss expansion followed by the general pair-substitution quadratizer."""
    X_raw, y = _as_xy(dataset)
    if X_raw.shape[1] != shape.n_features:
        raise ValueError(
            f"expected {shape.n_features} features, got {X_raw.shape[1]}"
        )
    scaler = FeatureScaler.fit(X_raw)
    X = scaler.transform(X_raw)
    layout = build_layout(shape)
    loss = loss_poly(shape, (X, y), layout)
    qmodel = quadratize(loss, lam=lam)
    offset = qmodel.quadratic.constant_term
    body = qmodel.quadratic - MultilinearPoly.constant(Basis.UNIT, offset)
    # a loss can skip high bit indices; size the QUBO to the full layout
    n_vars = max(qmodel.n_vars, layout.total_spins + qmodel.n_aux)
    qubo = QuboModel.from_poly(body, n_vars=n_vars)
    lam_value = (
        float(lam)
        if lam is not None
        else max((e.lam for e in qmodel.reduction.entries), default=1.0)
    )
    counts = {
        "abstract_spins": layout.total_spins,
        "n_vw": 0,
        "n_vww": 0,
        "n_ww": 0,
        "n_aux": qmodel.n_aux,
    }
    return CompiledModel(
        shape=shape,
        scaler=scaler,
        layout=layout,
        reduction=qmodel.reduction,
        qubo=qubo,
        offset=offset,
        counts=counts,
        lam=lam_value,
        path=GENERIC,
    )


def compile_model(
    shape: NetworkShape, dataset, lam: float | None = None, path: str = "auto"
) -> CompiledModel:
    """Dispatch to the structured path when the activation allows it."""
    if path == "auto":
        path = STRUCTURED if shape.activation.degree <= 2 else GENERIC
    if path == STRUCTURED:
        return compile_structured(shape, dataset, lam=lam)
    if path == GENERIC:
        return compile_generic(shape, dataset, lam=lam)
    raise ValueError(f"unknown compilation path {path!r}")


def decode_solution(
    model: CompiledModel, assignment: Sequence[int]
) -> TrainedNetwork:
    """Read the parameter bits out of a solver assignment."""
    if len(assignment) < model.layout.total_spins:
        raise ValueError(
            f"assignment has {len(assignment)} bits; the model needs at "
            f"least {model.layout.total_spins}"
        )
    shape = model.shape
    cols = weight_columns(shape)
    w = np.zeros((shape.n_hidden, len(cols)))
    for i in range(1, shape.n_hidden + 1):
        for k, j in enumerate(cols):
            w[i - 1, k] = model.layout.decode(f"w[{i}][{j}]", assignment)
    v = np.array(
        [model.layout.decode(f"v[{i}]", assignment) for i in range(1, shape.n_hidden + 1)]
    )
    v0 = model.layout.decode("v0", assignment)
    return TrainedNetwork(shape=shape, w=w, v=v, v0=v0, scaler=model.scaler)
