"""Network architecture, binary parameter encoding, and decoded predictors.

A single hidden layer: Y(x) = sum_i v_i g(w_i . x) + v0 with a polynomial
activation g.  Hidden weights and v use the standard N_b-bit encoding into
[-1, 1]; the output bias v0 snaps to two configurable levels.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

STANDARD = "standard"
LEVELS = "levels"

DEFAULT_LAST_BIAS_LEVELS = (-0.5, 0.0)


@dataclass(frozen=True)
class ActivationPoly:
    """Polynomial activation g(x) = sum_k coeffs[k] * x^k."""

    coeffs: tuple[float, ...]
    name: str = ""

    def __post_init__(self) -> None:
        cs = tuple(float(c) for c in self.coeffs)
        if len(cs) < 2:
            raise ValueError("activation needs degree >= 1")
        while len(cs) > 2 and cs[-1] == 0.0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        out = np.zeros_like(np.asarray(x, dtype=np.float64))
        for c in reversed(self.coeffs):
            out = out * x + c
        return out

    def derivative_at(self, x):
        out = np.zeros_like(np.asarray(x, dtype=np.float64))
        for k in range(self.degree, 0, -1):
            out = out * x + k * self.coeffs[k]
        return out

    def to_doc(self) -> dict:
        return {"coeffs": list(self.coeffs), "name": self.name}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ActivationPoly":
        return cls(tuple(doc["coeffs"]), str(doc.get("name", "")))


def _sigmoid_fit_coeffs() -> tuple[float, ...]:
    xs = np.linspace(-4.0, 4.0, 801)
    ys = 1.0 / (1.0 + np.exp(-xs))
    V = np.vander(xs, 4, increasing=True)
    coef, *_ = np.linalg.lstsq(V, ys, rcond=None)
    return tuple(float(c) for c in coef)


def activation_preset(name: str) -> ActivationPoly:
    """Presets: 'square', 'relu2' (smooth quadratic ReLU stand-in), 'sigmoid-fit'."""
    if name == "square":
        return ActivationPoly((0.0, 0.0, 1.0), name="square")
    if name == "relu2":
        return ActivationPoly((0.25, 0.5, 0.25), name="relu2")
    if name == "sigmoid-fit":
        return ActivationPoly(_sigmoid_fit_coeffs(), name="sigmoid-fit")
    raise ValueError(
        f"unknown activation {name!r}; presets are 'square', 'relu2', 'sigmoid-fit'"
    )


ACTIVATION_PRESETS = ("square", "relu2", "sigmoid-fit")


@dataclass(frozen=True)
class NetworkShape:
    n_features: int
    n_hidden: int
    n_bits: int
    first_layer_bias: bool = False
    activation: ActivationPoly = field(
        default_factory=lambda: activation_preset("square")
    )
    last_bias_levels: tuple[float, float] = DEFAULT_LAST_BIAS_LEVELS

    def __post_init__(self) -> None:
        if self.n_features < 1 or self.n_hidden < 1 or self.n_bits < 1:
            raise ValueError("n_features, n_hidden, n_bits must all be >= 1")
        a, b = self.last_bias_levels
        if a == b:
            raise ValueError("last_bias_levels must be distinct")
        object.__setattr__(self, "last_bias_levels", (float(a), float(b)))

    @property
    def n_inputs(self) -> int:
        """Inner weight columns per hidden unit, bias column included."""
        return self.n_features + (1 if self.first_layer_bias else 0)

    def to_doc(self) -> dict:
        return {
            "n_features": self.n_features,
            "n_hidden": self.n_hidden,
            "n_bits": self.n_bits,
            "first_layer_bias": self.first_layer_bias,
            "activation": self.activation.to_doc(),
            "last_bias_levels": list(self.last_bias_levels),
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "NetworkShape":
        return cls(
            n_features=int(doc["n_features"]),
            n_hidden=int(doc["n_hidden"]),
            n_bits=int(doc["n_bits"]),
            first_layer_bias=bool(doc.get("first_layer_bias", False)),
            activation=ActivationPoly.from_doc(doc["activation"]),
            last_bias_levels=tuple(doc["last_bias_levels"]),
        )


@dataclass(frozen=True)
class Encoding:
    """How a bit block maps to a real parameter."""

    kind: str
    levels: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.kind not in (STANDARD, LEVELS):
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        if self.kind == LEVELS:
            if self.levels is None:
                raise ValueError("levels encoding needs its two levels")
            object.__setattr__(
                self, "levels", (float(self.levels[0]), float(self.levels[1]))
            )
        elif self.levels is not None:
            raise ValueError("standard encoding takes no levels")

    def to_doc(self) -> dict:
        doc: dict = {"kind": self.kind}
        if self.levels is not None:
            doc["levels"] = list(self.levels)
        return doc

    @classmethod
    def from_doc(cls, doc: Mapping) -> "Encoding":
        levels = doc.get("levels")
        return cls(str(doc["kind"]), tuple(levels) if levels else None)


def _standard_affine(n_bits: int) -> tuple[float, list[float]]:
    """p = base + sum_a scale[a] * bit[a]; bit 0 is the most significant."""
    norm = 1.0 - 2.0 ** (-n_bits)
    return -1.0, [2.0 ** (-a) / norm for a in range(n_bits)]


def encoding_affine(encoding: Encoding, n_bits: int) -> tuple[float, list[float]]:
    """Affine form of the decoded parameter in its bits."""
    base, scales = _standard_affine(n_bits)
    if encoding.kind == STANDARD:
        return base, scales
    a, b = encoding.levels
    # remap [-1, 1] onto [a, b]
    half = (b - a) / 2.0
    return a + half * (base + 1.0), [half * s for s in scales]


def decode_param(
    bits: Sequence[int], encoding: Encoding, n_bits: int | None = None
) -> float:
    """Decode one bit block; standard values lie in [-1, 1].

    With a single bit the levels encoding maps 0 to the first level and 1 to
    the second; more bits interpolate the standard grid between the levels.
    """
    if n_bits is not None and len(bits) != n_bits:
        raise ValueError(f"expected {n_bits} bits, got {len(bits)}")
    if len(bits) < 1:
        raise ValueError("need at least one bit")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    base, scales = encoding_affine(encoding, len(bits))
    return float(base + sum(s * b for s, b in zip(scales, bits)))


@dataclass(frozen=True)
class LayoutEntry:
    name: str
    first_var_index: int
    n_bits: int
    encoding: Encoding

    @property
    def var_range(self) -> range:
        return range(self.first_var_index, self.first_var_index + self.n_bits)


@dataclass(frozen=True)
class ParamLayout:
    """Contiguous, disjoint bit blocks for every network parameter."""

    entries: tuple[LayoutEntry, ...]
    total_spins: int

    def __post_init__(self) -> None:
        cursor = 0
        for e in self.entries:
            if e.first_var_index != cursor:
                raise ValueError(f"layout block {e.name!r} is not contiguous")
            if e.n_bits < 1:
                raise ValueError(f"layout block {e.name!r} has no bits")
            cursor += e.n_bits
        if cursor != self.total_spins:
            raise ValueError("total_spins disagrees with the blocks")

    def entry(self, name: str) -> LayoutEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def decode(self, name: str, assignment: Sequence[int]) -> float:
        e = self.entry(name)
        bits = [assignment[i] for i in e.var_range]
        return decode_param(bits, e.encoding, n_bits=e.n_bits)

    def to_doc(self) -> dict:
        return {
            "total_spins": self.total_spins,
            "params": [
                {
                    "name": e.name,
                    "first_var_index": e.first_var_index,
                    "n_bits": e.n_bits,
                    "encoding": e.encoding.to_doc(),
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_doc(cls, doc: Mapping) -> "ParamLayout":
        entries = tuple(
            LayoutEntry(
                name=str(p["name"]),
                first_var_index=int(p["first_var_index"]),
                n_bits=int(p["n_bits"]),
                encoding=Encoding.from_doc(p["encoding"]),
            )
            for p in doc["params"]
        )
        return cls(entries=entries, total_spins=int(doc["total_spins"]))


def weight_columns(shape: NetworkShape) -> list[int]:
    """Inner-weight column indices; 0 is the bias column when enabled."""
    first = 0 if shape.first_layer_bias else 1
    return list(range(first, shape.n_features + 1))


def build_layout(shape: NetworkShape) -> ParamLayout:
    """Bit blocks in order: w rows, then v, then v0."""
    entries: list[LayoutEntry] = []
    cursor = 0
    std = Encoding(STANDARD)
    for i in range(1, shape.n_hidden + 1):
        for j in weight_columns(shape):
            entries.append(LayoutEntry(f"w[{i}][{j}]", cursor, shape.n_bits, std))
            cursor += shape.n_bits
    for i in range(1, shape.n_hidden + 1):
        entries.append(LayoutEntry(f"v[{i}]", cursor, shape.n_bits, std))
        cursor += shape.n_bits
    entries.append(
        LayoutEntry(
            "v0", cursor, shape.n_bits, Encoding(LEVELS, shape.last_bias_levels)
        )
    )
    cursor += shape.n_bits
    return ParamLayout(entries=tuple(entries), total_spins=cursor)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature affine map onto [-1, 1]; constant features go to 0."""

    mins: tuple[float, ...]
    maxs: tuple[float, ...]

    @classmethod
    def fit(cls, features: np.ndarray) -> "FeatureScaler":
        X = np.asarray(features, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise ValueError("features must be a non-empty 2-D array")
        return cls(
            mins=tuple(float(v) for v in X.min(axis=0)),
            maxs=tuple(float(v) for v in X.max(axis=0)),
        )

    def transform(self, features: np.ndarray) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.mins):
            raise ValueError(
                f"expected {len(self.mins)} features, got {X.shape[1]}"
            )
        out = np.zeros_like(X)
        for k, (lo, hi) in enumerate(zip(self.mins, self.maxs)):
            if hi > lo:
                out[:, k] = -1.0 + 2.0 * (X[:, k] - lo) / (hi - lo)
            else:
                out[:, k] = 0.0
        return out

    def to_doc(self) -> dict:
        return {"mins": list(self.mins), "maxs": list(self.maxs)}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "FeatureScaler":
        return cls(mins=tuple(doc["mins"]), maxs=tuple(doc["maxs"]))


@dataclass(frozen=True)
class TrainedNetwork:
    """Decoded weights plus the scaler the model was compiled with."""

    shape: NetworkShape
    w: np.ndarray
    v: np.ndarray
    v0: float
    scaler: FeatureScaler | None = None

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=np.float64)
        v = np.asarray(self.v, dtype=np.float64)
        cols = len(weight_columns(self.shape))
        if w.shape != (self.shape.n_hidden, cols):
            raise ValueError(f"w must have shape ({self.shape.n_hidden}, {cols})")
        if v.shape != (self.shape.n_hidden,):
            raise ValueError(f"v must have shape ({self.shape.n_hidden},)")
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "v0", float(self.v0))

    def _inputs(self, features: np.ndarray) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64)
        single = X.ndim == 1
        if single:
            X = X[None, :]
        if X.shape[1] != self.shape.n_features:
            raise ValueError(
                f"expected {self.shape.n_features} features, got {X.shape[1]}"
            )
        if self.scaler is not None:
            X = self.scaler.transform(X)
        if self.shape.first_layer_bias:
            X = np.hstack([np.ones((X.shape[0], 1)), X])
        return X

    def output(self, features: np.ndarray) -> np.ndarray:
        """Network scores Y(x); accepts one point or a batch."""
        X = self._inputs(features)
        U = X @ self.w.T
        return self.shape.activation(U) @ self.v + self.v0

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Class labels in {-1, +1}; the Y == 0 boundary maps to +1."""
        y = self.output(features)
        return np.where(y >= 0.0, 1, -1)

    def to_doc(self) -> dict:
        return {
            "shape": self.shape.to_doc(),
            "w": self.w.tolist(),
            "v": self.v.tolist(),
            "v0": self.v0,
            "scaler": self.scaler.to_doc() if self.scaler else None,
        }
