"""Solvers for QUBO models: exact enumeration, simulated annealing, remote."""

from __future__ import annotations

import os
import time
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import httpx
import numpy as np

from .errors import AuthError, ConfigError, RemoteSamplerError, SolverError
from .qubo import QuboModel

EXACT_MAX_VARS = 24
ENUM_BLOCK_ELEMS = 1 << 22
TIE_TOL = 1e-9
ENERGY_MISMATCH_TOL = 1e-6

ENDPOINT_ENV = "QUBONET_ENDPOINT"
TOKEN_ENV = "QUBONET_TOKEN"


@dataclass(frozen=True)
class Sample:
    """One sampler read: an assignment, its energy, and a multiplicity."""

    assignment: tuple[int, ...]
    energy: float
    occurrences: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "assignment", tuple(int(b) for b in self.assignment)
        )
        if any(b not in (0, 1) for b in self.assignment):
            raise ValueError("assignments are 0/1 bit tuples")
        if self.occurrences < 1:
            raise ValueError("occurrences must be >= 1")


@dataclass(frozen=True)
class AnnealSchedule:
    """Piecewise-linear anneal fraction s(t), times in microseconds.

    Metadata only: it is serialized into remote requests and run records but
    the local simulated annealer never interprets it.
    """

    points: tuple[tuple[float, float], ...]
    s_q: float = 0.2

    def __post_init__(self) -> None:
        pts = tuple((float(t), float(s)) for t, s in self.points)
        if len(pts) < 2:
            raise ValueError("schedule needs at least two points")
        times = [t for t, _ in pts]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("schedule times must be non-decreasing")
        if any(not 0.0 <= s <= 1.0 for _, s in pts):
            raise ValueError("anneal fraction must lie in [0, 1]")
        if pts[-1][1] != 1.0:
            raise ValueError("schedule must end at s=1")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "s_q", float(self.s_q))

    @classmethod
    def with_pause(
        cls,
        s_q: float = 0.2,
        t_ramp: float = 20.0,
        t_resume: float = 80.0,
        t_end: float = 100.0,
    ) -> "AnnealSchedule":
        """Ramp to s_q by t_ramp, hold until t_resume, finish at t_end."""
        return cls(
            points=(
                (0.0, 0.0),
                (t_ramp, s_q),
                (t_resume, s_q),
                (t_end, 1.0),
            ),
            s_q=s_q,
        )

    def to_doc(self) -> dict:
        return {"points": [[t, s] for t, s in self.points], "s_q": self.s_q}

    @classmethod
    def from_doc(cls, doc: Mapping) -> "AnnealSchedule":
        return cls(
            points=tuple((float(t), float(s)) for t, s in doc["points"]),
            s_q=float(doc.get("s_q", 0.2)),
        )


@dataclass(frozen=True)
class SamplerConfig:
    """Knobs shared by the local annealer and the remote client."""

    num_reads: int = 300
    seed: int = 0
    sweeps: int = 1000
    beta_range: tuple[float, float] | None = None
    schedule: AnnealSchedule | None = None

    def __post_init__(self) -> None:
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        if self.sweeps < 0:
            raise ValueError("sweeps must be >= 0")
        if self.beta_range is not None:
            lo, hi = self.beta_range
            if not (0 < lo <= hi):
                raise ValueError("beta_range must satisfy 0 < hot <= cold")
            object.__setattr__(self, "beta_range", (float(lo), float(hi)))


def default_beta_range(model: QuboModel) -> tuple[float, float]:
    """Inverse-temperature ladder endpoints scaled to the coefficient range."""
    scale = max(
        [abs(v) for v in model.linear.values()]
        + [abs(v) for v in model.quadratic.values()]
        + [1e-12]
    )
    return (0.1 / scale, 10.0 / scale)


def _bit_block(start: int, stop: int, n: int) -> np.ndarray:
    ks = np.arange(start, stop, dtype=np.int64)
    return ((ks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


def exact_solve(
    model: QuboModel, max_vars: int = EXACT_MAX_VARS
) -> tuple[float, list[tuple[int, ...]]]:
    """Global minimum by enumeration; returns every minimizer within 1e-9.

    The space splits into low and high variable halves so energies come from
    one rank-n update plus two small tables rather than 2^n evaluations from
    scratch.  Minimizers come back lexicographically sorted.  Refuses models
    with more than ``max_vars`` variables; use sa_sample for those.
    """
    n = model.n_vars
    if n > max_vars:
        raise SolverError(
            f"exact_solve enumerates 2^{n} assignments which is above the "
            f"limit of 2^{max_vars}; use sa_sample or raise max_vars"
        )
    if n == 0:
        return model.offset, [()]

    h, U, offset = model.dense()
    n_lo = min(n, 13)
    n_hi = n - n_lo
    B_lo = _bit_block(0, 1 << n_lo, n_lo)
    E_lo = B_lo @ h[:n_lo] + ((B_lo @ U[:n_lo, :n_lo]) * B_lo).sum(axis=1)
    if n_hi == 0:
        E = E_lo + offset
        best = float(E.min())
        ks = np.nonzero(E <= best + TIE_TOL)[0]
        rows = ((ks[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)
        return best, sorted(tuple(int(b) for b in row) for row in rows)

    B_hi = _bit_block(0, 1 << n_hi, n_hi)
    E_hi = B_hi @ h[n_lo:] + ((B_hi @ U[n_lo:, n_lo:]) * B_hi).sum(axis=1)
    G = B_lo @ U[:n_lo, n_lo:]  # (2^n_lo, n_hi) cross-coupling fields

    best = np.inf
    kept_ks: list[np.ndarray] = []
    kept_es: list[np.ndarray] = []
    block = max(1, ENUM_BLOCK_ELEMS >> n_lo)
    for start in range(0, 1 << n_hi, block):
        stop = min(start + block, 1 << n_hi)
        E = G @ B_hi[start:stop].T
        E += E_lo[:, None]
        E += E_hi[None, start:stop]
        cmin = float(E.min())
        if cmin < best:
            best = cmin
            kept_ks = [k[e <= best + TIE_TOL] for k, e in zip(kept_ks, kept_es)]
            kept_es = [e[e <= best + TIE_TOL] for e in kept_es]
        lo_idx, hi_idx = np.nonzero(E <= best + TIE_TOL)
        if lo_idx.size:
            kept_ks.append(lo_idx + ((hi_idx + start) << n_lo))
            kept_es.append(E[lo_idx, hi_idx])
    ks = np.concatenate(kept_ks)
    es = np.concatenate(kept_es)
    final = ks[es <= best + TIE_TOL]
    rows = ((final[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.int64)
    assignments = sorted(tuple(int(b) for b in row) for row in rows)
    return best + offset, assignments


def sa_sample(model: QuboModel, config: SamplerConfig | None = None) -> list[Sample]:
    """Simulated annealing with single-bit Metropolis sweeps.

    Each read runs an independent chain seeded from seed + read index, so a
    fixed config gives byte-identical results regardless of batching.  With
    sweeps=0 the initial random states come back unannealed.
    """
    cfg = config or SamplerConfig()
    n = model.n_vars
    if n == 0:
        return [Sample((), model.offset, 1) for _ in range(cfg.num_reads)]

    h, U, _ = model.dense()
    M = U + U.T

    beta_lo, beta_hi = cfg.beta_range or default_beta_range(model)
    if cfg.sweeps > 1:
        betas = np.geomspace(beta_lo, beta_hi, cfg.sweeps)
    else:
        betas = np.full(cfg.sweeps, beta_hi)

    reads = cfg.num_reads
    samples: list[Sample] = []
    # cap the pre-generated uniform block at ~64M doubles
    block = max(1, min(reads, int(6.4e7 // max(1, cfg.sweeps * n))))
    for r0 in range(0, reads, block):
        r1 = min(r0 + block, reads)
        rngs = [np.random.default_rng(cfg.seed + r) for r in range(r0, r1)]
        B = np.stack([rng.integers(0, 2, size=n) for rng in rngs]).astype(np.float64)
        if cfg.sweeps:
            unis = np.stack(
                [rng.random(size=(cfg.sweeps, n)) for rng in rngs]
            )
            base = np.tile(np.arange(n), (cfg.sweeps, 1))
            orders = np.stack([rng.permuted(base, axis=1) for rng in rngs])
            rows = np.arange(r1 - r0)
            for t in range(cfg.sweeps):
                beta = betas[t]
                for step in range(n):
                    i = orders[:, t, step]
                    cur = B[rows, i]
                    local = h[i] + np.einsum("rj,rj->r", B, M[i, :])
                    delta = (1.0 - 2.0 * cur) * local
                    accept = (delta <= 0.0) | (
                        unis[:, t, step] < np.exp(-beta * np.maximum(delta, 0.0))
                    )
                    B[rows, i] = np.where(accept, 1.0 - cur, cur)
        energies = model.energy_batch(B)
        for row, e in zip(B, energies):
            samples.append(Sample(tuple(int(b) for b in row), float(e), 1))
    return samples


def best_of(samples: Sequence[Sample]) -> Sample:
    """Lowest-energy sample; ties go to the lexicographically smallest bits."""
    if not samples:
        raise ValueError("no samples to choose from")
    return min(samples, key=lambda s: (s.energy, s.assignment))


def remote_sample(
    model: QuboModel,
    config: SamplerConfig | None = None,
    endpoint: str | None = None,
    token: str | None = None,
    client: httpx.Client | None = None,
    max_retries: int = 3,
) -> list[Sample]:
    """Submit a QUBO to a remote sampling service and parse its reads.

    Endpoint and token fall back to the QUBONET_ENDPOINT / QUBONET_TOKEN
    environment variables.  Transport failures and 5xx responses are retried
    with exponential backoff; a 401 fails immediately.  Energies are
    recomputed locally and a mismatch beyond 1e-6 is reported as a warning.
    """
    cfg = config or SamplerConfig()
    endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
    if not endpoint:
        raise ConfigError(
            f"no sampler endpoint: pass endpoint= or set {ENDPOINT_ENV}"
        )
    token = token if token is not None else os.environ.get(TOKEN_ENV)
    if not token:
        raise ConfigError(f"no auth token: pass token= or set {TOKEN_ENV}")

    payload = {
        "qubo": model.to_doc(),
        "num_reads": cfg.num_reads,
        "schedule": cfg.schedule.to_doc() if cfg.schedule else None,
    }
    headers = {"Authorization": f"Bearer {token}"}

    own_client = client is None
    http = client or httpx.Client(timeout=30.0)
    try:
        resp = None
        last_exc: Exception | None = None
        for attempt in range(max_retries):
            if attempt:
                time.sleep(0.25 * (2 ** (attempt - 1)))
            try:
                resp = http.post(endpoint, json=payload, headers=headers)
            except httpx.HTTPError as exc:
                last_exc = exc
                resp = None
                continue
            if resp.status_code == 401:
                raise AuthError(
                    f"sampler endpoint rejected the token (401): {endpoint}"
                )
            if resp.status_code >= 500:
                last_exc = RemoteSamplerError(
                    f"sampler returned {resp.status_code}"
                )
                resp = None
                continue
            break
        if resp is None:
            raise RemoteSamplerError(
                f"sampler unreachable after {max_retries} attempts: {last_exc}"
            )
        if resp.status_code != 200:
            raise RemoteSamplerError(
                f"sampler returned {resp.status_code}: {resp.text[:200]}"
            )
        try:
            doc = resp.json()
            raw = doc["samples"]
            out = []
            for item in raw:
                bits = tuple(int(b) for b in item["assignment"])
                remote_e = float(item["energy"])
                occ = int(item.get("occurrences", 1))
                local_e = model.energy(bits)
                if abs(local_e - remote_e) > ENERGY_MISMATCH_TOL:
                    warnings.warn(
                        f"remote energy {remote_e!r} disagrees with local "
                        f"{local_e!r}; keeping the local value",
                        stacklevel=2,
                    )
                out.append(Sample(bits, local_e, occ))
        except (KeyError, TypeError, ValueError) as exc:
            raise RemoteSamplerError(
                f"malformed sampler response ({exc}): {resp.text[:200]}"
            ) from exc
        return out
    finally:
        if own_client:
            http.close()
