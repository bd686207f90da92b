"""Large eigenvalue configurations of block upper triangular matrices.

Block indices are 0-based in code; serialized tables label blocks from 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .blocks import Decomposition, block_diagonalize
from .spectra import (
    ANGLE_TOL,
    PROXIMAL_TOL,
    Flag,
    NotProximalError,
    Spectrum,
    Subspace,
    ThetaSet,
    as_theta,
    eigen_magnitudes,
    intersection,
    orthonormalize,
)


class TieAmbiguityError(NotProximalError):
    """Tied magnitudes from different blocks straddle position k."""


class ConfigError(ValueError):
    pass


def iota(d: int, k: int) -> int:
    if not 1 <= k <= d - 1:
        raise ValueError(f"k={k} outside 1..{d - 1}")
    return d - k


def iota_set(theta: ThetaSet) -> ThetaSet:
    return ThetaSet(theta.d, tuple(theta.d - k for k in theta))


@dataclass(frozen=True)
class EigConfig:
    dec: Decomposition
    theta: ThetaSet
    q: tuple[tuple[int, ...], ...]  # q[j][position of k in theta]

    def __post_init__(self):
        q = tuple(tuple(int(v) for v in row) for row in self.q)
        if len(q) != self.dec.m or any(len(row) != len(self.theta) for row in q):
            raise ConfigError("configuration table has the wrong shape")
        for j, row in enumerate(q):
            for v in row:
                if not 0 <= v <= self.dec.dims[j]:
                    raise ConfigError(f"q entry {v} outside 0..{self.dec.dims[j]} for block {j + 1}")
        object.__setattr__(self, "q", q)

    def __call__(self, j: int, k: int) -> int:
        return self.q[j][self.theta.members.index(k)]

    def column(self, k: int) -> tuple[int, ...]:
        i = self.theta.members.index(k)
        return tuple(row[i] for row in self.q)

    @classmethod
    def from_columns(cls, dec: Decomposition, theta: ThetaSet, columns: Mapping[int, Sequence[int]]) -> "EigConfig":
        return cls(dec, theta, tuple(tuple(columns[k][j] for k in theta) for j in range(dec.m)))

    def to_json(self) -> dict:
        return {
            "dims": list(self.dec.dims),
            "theta": list(self.theta.members),
            "q": {str(j + 1): {str(k): self(j, k) for k in self.theta} for j in range(self.dec.m)},
        }

    @classmethod
    def from_json(cls, data: dict) -> "EigConfig":
        dec = Decomposition(tuple(data["dims"]))
        theta = ThetaSet(dec.total, tuple(data["theta"]))
        q = tuple(tuple(int(data["q"][str(j + 1)][str(k)]) for k in theta) for j in range(dec.m))
        return cls(dec, theta, q)

    def table(self) -> str:
        """One row per k, one column per block."""
        width = max(2, len(str(self.dec.m)) + 1)
        head = "k   " + "".join(f"{'U' + str(j + 1):>{width + 1}}" for j in range(self.dec.m))
        rows = [f"{k:<4d}" + "".join(f"{self(j, k):>{width + 1}d}" for j in range(self.dec.m)) for k in self.theta]
        return "\n".join([head, *rows])


def block_spectra(a, dec: Decomposition) -> list[Spectrum]:
    b = block_diagonalize(a, dec)
    out = []
    for blk in dec.blocks_of(b):
        if blk.shape[0] == 0:
            out.append(Spectrum(np.zeros(0), np.zeros(0, dtype=complex)))
        else:
            out.append(eigen_magnitudes(blk))
    return out


def merged_spectrum(spectra: Sequence[Spectrum]) -> Spectrum:
    """Sort-merge the block spectra, tagging each magnitude with its block."""
    mags = np.concatenate([s.magnitudes for s in spectra]) if spectra else np.zeros(0)
    evs = np.concatenate([s.eigenvalues for s in spectra]) if spectra else np.zeros(0, complex)
    tags = np.concatenate([np.full(len(s), j) for j, s in enumerate(spectra)]).astype(int)
    order = np.argsort(-mags, kind="stable")
    return Spectrum(mags[order], evs[order], tuple(int(t) for t in tags[order]))


def config_from_spectra(spectra: Sequence[Spectrum], dec: Decomposition, theta, tol: float = PROXIMAL_TOL) -> EigConfig:
    th = as_theta(theta, dec.total)
    merged = merged_spectrum(spectra)
    lam1 = merged[1] if len(merged) else 0.0
    columns = {}
    for k in th:
        if merged[k] - merged[k + 1] <= tol * lam1:
            if merged.block_tags[k - 1] != merged.block_tags[k]:
                raise TieAmbiguityError(
                    f"magnitudes {merged[k]:.6g} (block {merged.block_tags[k - 1] + 1}) and "
                    f"{merged[k + 1]:.6g} (block {merged.block_tags[k] + 1}) tie at position {k}"
                )
            raise NotProximalError(f"lambda_{k} = lambda_{k + 1} within tolerance")
        top = merged.block_tags[:k]
        columns[k] = [top.count(j) for j in range(dec.m)]
    return EigConfig.from_columns(dec, th, columns)


def large_config(a, dec: Decomposition, theta, tol: float = PROXIMAL_TOL) -> EigConfig:
    """q[j][k] = number of eigenvalues of block j among the k largest magnitudes."""
    return config_from_spectra(block_spectra(a, dec), dec, theta, tol)


def is_admissible(cfg: EigConfig) -> bool:
    if any(sum(cfg.column(k)) != k for k in cfg.theta):
        return False
    ks = list(cfg.theta)
    return all(cfg(j, a) <= cfg(j, b) for j in range(cfg.dec.m) for a, b in zip(ks, ks[1:]))


def nonempty_pairs(cfg: EigConfig, k: int) -> set[tuple[int, int]]:
    col = cfg.column(k)
    dims = cfg.dec.dims
    big = [i for i in range(cfg.dec.m) if col[i] > 0]
    small = [j for j in range(cfg.dec.m) if col[j] < dims[j]]
    return {(i, j) for i in big for j in small}


def pair_log_ratio(spectra: Sequence[Spectrum], cfg: EigConfig, k: int, i: int, j: int) -> float:
    """log(lambda_{q_ik}(B_i) / lambda_{q_jk + 1}(B_j))."""
    return math.log(spectra[i][cfg(i, k)] / spectra[j][cfg(j, k) + 1])


def gap_via_config(spectra: Sequence[Spectrum], cfg: EigConfig, k: int) -> float:
    pairs = nonempty_pairs(cfg, k)
    if not pairs:
        raise ConfigError(f"no admissible index pairs at k={k}; configuration is not admissible")
    return min(pair_log_ratio(spectra, cfg, k, i, j) for i, j in sorted(pairs))


def block_thetas(cfg: EigConfig) -> list[ThetaSet]:
    out = []
    for j, dj in enumerate(cfg.dec.dims):
        vals = {cfg(j, k) for k in cfg.theta}
        out.append(ThetaSet(max(dj, 1), tuple(v for v in vals if 1 <= v <= dj - 1)))
    return out


def half_bound_check(cfg: EigConfig) -> bool:
    d = cfg.dec.total
    for k in cfg.theta:
        for j, dj in enumerate(cfg.dec.dims):
            q = cfg(j, k)
            if 2 * k <= d and 2 * q > dj:
                return False
            if 2 * k >= d and 2 * q < dj:
                return False
    return True


@dataclass(frozen=True)
class StructuredReport:
    flag: Flag
    mode: str
    measured: tuple[tuple[int, ...], ...]
    passed: bool


def _coordinate_subspace(d: int, s: slice) -> Subspace:
    return Subspace(np.eye(d)[:, s])


def check_structured(flag: Flag, dec: Decomposition, cfg: EigConfig, mode: str = "strong",
                     tol: float = ANGLE_TOL) -> StructuredReport:
    """Measure dim(U_j cap F_k) (strong) or dim pi_j(U'_j cap F_k) (weak) against Q."""
    if flag.signature.members != cfg.theta.members:
        raise ConfigError(f"flag signature {flag.signature.members} differs from theta {cfg.theta.members}")
    if mode not in ("weak", "strong"):
        raise ValueError(f"mode must be 'weak' or 'strong', got {mode!r}")
    d = dec.total
    measured = []
    for j in range(dec.m):
        row = []
        for k in cfg.theta:
            fk = flag[k]
            if mode == "strong":
                inter = intersection(_coordinate_subspace(d, dec.block(j)), fk, tol)
                row.append(inter.dim)
            else:
                inter = intersection(_coordinate_subspace(d, dec.prefix(j)), fk, tol)
                proj = inter.basis[dec.block(j), :]
                row.append(orthonormalize(proj, tol).shape[1] if proj.size else 0)
        measured.append(tuple(row))
    measured = tuple(measured)
    return StructuredReport(flag, mode, measured, measured == cfg.q)
