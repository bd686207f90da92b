"""Eigenvalue magnitudes, logarithmic gaps, attracting/repelling subspaces and flags."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np
import scipy.linalg

PROXIMAL_TOL = 1e-9
ANGLE_TOL = 1e-7


class SpectralError(ArithmeticError):
    pass


class EigenSolverError(SpectralError):
    pass


class SingularGapError(SpectralError):
    pass


class NotProximalError(SpectralError):
    pass


@dataclass(frozen=True)
class ThetaSet:
    """A subset of {1, ..., d-1}; empty is allowed."""

    d: int
    members: tuple[int, ...] = ()

    def __post_init__(self):
        members = tuple(sorted(set(int(k) for k in self.members)))
        for k in members:
            if not 1 <= k <= self.d - 1:
                raise ValueError(f"theta member {k} outside 1..{self.d - 1}")
        object.__setattr__(self, "members", members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)

    def __contains__(self, k):
        return k in self.members

    @classmethod
    def full(cls, d: int) -> "ThetaSet":
        return cls(d, tuple(range(1, d)))


def as_theta(theta, d: int) -> ThetaSet:
    if isinstance(theta, ThetaSet):
        if theta.d != d:
            raise ValueError(f"theta is for dimension {theta.d}, expected {d}")
        return theta
    return ThetaSet(d, tuple(theta))


@dataclass(frozen=True)
class Spectrum:
    magnitudes: np.ndarray
    eigenvalues: np.ndarray
    block_tags: tuple[int, ...] | None = None

    def __len__(self):
        return len(self.magnitudes)

    def __getitem__(self, k: int) -> float:
        """1-based access, matching lambda_k."""
        return float(self.magnitudes[k - 1])


@dataclass(frozen=True)
class Subspace:
    basis: np.ndarray

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def zero(cls, d: int, dtype=float) -> "Subspace":
        return cls(np.zeros((d, 0), dtype=dtype))

    @classmethod
    def span(cls, vectors, tol: float = ANGLE_TOL) -> "Subspace":
        """Span of a sequence of vectors (one vector per row)."""
        v = np.atleast_2d(np.asarray(vectors))
        return cls(orthonormalize(v.T, tol))

    def contains(self, other: "Subspace", tol: float = ANGLE_TOL) -> bool:
        if other.dim == 0:
            return True
        resid = other.basis - self.basis @ (self.basis.conj().T @ other.basis)
        return np.linalg.norm(resid, 2) <= tol

    def equals(self, other: "Subspace", tol: float = ANGLE_TOL) -> bool:
        return self.dim == other.dim and self.contains(other, tol) and other.contains(self, tol)


@dataclass(frozen=True)
class Flag:
    signature: ThetaSet
    subspaces: Mapping[int, Subspace]

    def __getitem__(self, k: int) -> Subspace:
        return self.subspaces[k]

    def is_nested(self, tol: float = ANGLE_TOL) -> bool:
        ks = list(self.signature)
        return all(self.subspaces[b].contains(self.subspaces[a], tol) for a, b in zip(ks, ks[1:]))


def orthonormalize(columns: np.ndarray, tol: float = ANGLE_TOL) -> np.ndarray:
    """Orthonormal basis of the column span; singular values below ``tol`` (relative
    to the largest) are dropped."""
    columns = np.asarray(columns)
    if columns.size == 0 or columns.shape[1] == 0:
        return np.zeros((columns.shape[0], 0), dtype=columns.dtype)
    u, s, _ = np.linalg.svd(columns, full_matrices=False)
    if s[0] == 0:
        return np.zeros((columns.shape[0], 0), dtype=columns.dtype)
    rank = int(np.sum(s > tol * max(1.0, s[0])))
    return u[:, :rank]


def intersection(s: Subspace, t: Subspace, tol: float = ANGLE_TOL) -> Subspace:
    d = s.ambient_dim
    if s.dim == 0 or t.dim == 0:
        return Subspace.zero(d, np.result_type(s.basis, t.basis))
    m = np.hstack([s.basis, -t.basis])
    _, sv, vh = np.linalg.svd(m)
    sv = np.concatenate([sv, np.zeros(m.shape[1] - len(sv))])
    null = vh[sv <= tol].conj().T
    if null.shape[1] == 0:
        return Subspace.zero(d, m.dtype)
    return Subspace(orthonormalize(s.basis @ null[: s.dim], tol))


def intersection_dim(s: Subspace, t: Subspace, tol: float = ANGLE_TOL) -> int:
    """dim s + dim t - rank[s | t], with singular values <= tol counted as zero."""
    if s.dim == 0 or t.dim == 0:
        return 0
    sv = np.linalg.svd(np.hstack([s.basis, t.basis]), compute_uv=False)
    return s.dim + t.dim - int(np.sum(sv > tol))


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if not np.iscomplexobj(a):
        a = a.astype(float)
    return a


def eigen_magnitudes(a) -> Spectrum:
    a = _as_matrix(a)
    try:
        ev = np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigensolver did not converge: {exc}") from exc
    if not np.all(np.isfinite(ev)):
        raise EigenSolverError("eigensolver returned non-finite eigenvalues")
    mags = np.abs(ev)
    order = np.argsort(-mags, kind="stable")
    return Spectrum(magnitudes=mags[order], eigenvalues=ev[order])


def two_sided_magnitudes(a, a_inv) -> np.ndarray:
    """Magnitudes of ``a`` with the small ones taken as reciprocals of those of ``a_inv``.

    The eigensolver resolves eigenvalues to an absolute error of order eps * ||a||,
    so magnitudes far below the spectral radius lose relative accuracy.  Below the
    geometric mean of the extremes, 1 / lambda_{d-i+1}(a_inv) is the better estimate.
    """
    fwd = eigen_magnitudes(a).magnitudes
    inv = eigen_magnitudes(a_inv).magnitudes
    if len(fwd) != len(inv):
        raise ValueError("matrix and inverse have different sizes")
    if len(fwd) == 0:
        return fwd
    rev = 1.0 / inv[::-1]
    split = math.sqrt(fwd[0] * rev[-1])
    mags = np.where(fwd >= split, fwd, rev)
    return np.sort(mags)[::-1]


def log_gap(a, k: int, *, spectrum: Spectrum | None = None, tol: float = PROXIMAL_TOL) -> float:
    spec = spectrum if spectrum is not None else eigen_magnitudes(a)
    d = len(spec)
    if not 1 <= k <= d - 1:
        raise ValueError(f"gap index {k} outside 1..{d - 1}")
    lo = spec[k + 1]
    if lo <= tol * max(spec[1], 1e-300):
        raise SingularGapError(f"lambda_{k + 1} vanishes; log gap undefined")
    return math.log(spec[k] / lo)


def is_proximal(a, theta: Iterable[int], tol: float = PROXIMAL_TOL, *, spectrum: Spectrum | None = None) -> bool:
    spec = spectrum if spectrum is not None else eigen_magnitudes(a)
    d = len(spec)
    ks = list(theta)
    for k in ks:
        if not 1 <= k <= d - 1:
            raise ValueError(f"theta member {k} outside 1..{d - 1}")
    scale = spec[1]
    if scale == 0:
        return not ks
    return all(spec[k] - spec[k + 1] > tol * scale for k in ks)


def _sorted_invariant_subspace(a: np.ndarray, keep) -> Subspace:
    """Invariant subspace of the eigenvalues selected by ``keep(|lambda|)``, read off
    an ordered Schur form (real Schur keeps conjugate pairs together)."""
    d = a.shape[0]
    if np.iscomplexobj(a):
        t, z, sdim = scipy.linalg.schur(a, output="complex", sort=lambda x: keep(abs(x)))
    else:
        t, z, sdim = scipy.linalg.schur(a, output="real", sort=lambda x, y: keep(math.hypot(x, y)))
    if sdim == 0:
        return Subspace.zero(d, z.dtype)
    return Subspace(z[:, :sdim])


def _threshold(mags: np.ndarray, selected: np.ndarray) -> float:
    lo = mags[selected].min()
    rest = mags[~selected]
    return (lo + rest.max()) / 2 if rest.size else -1.0


def attracting_subspace(a, k: int, tol: float = PROXIMAL_TOL) -> Subspace:
    """Span of generalized eigenspaces with magnitude >= lambda_k (ties included)."""
    a = _as_matrix(a)
    d = a.shape[0]
    if not 0 <= k <= d:
        raise ValueError(f"k={k} outside 0..{d}")
    if k == 0:
        return Subspace.zero(d, a.dtype)
    spec = eigen_magnitudes(a)
    mags = spec.magnitudes
    selected = mags >= spec[k] - tol * spec[1]
    if selected.all():
        return Subspace(np.eye(d, dtype=a.dtype))
    cut = _threshold(mags, selected)
    sub = _sorted_invariant_subspace(a, lambda r: r > cut)
    if sub.dim != int(selected.sum()):
        raise EigenSolverError("Schur reordering lost eigenvalues across the threshold")
    return sub


def repelling_subspace(a, k: int, tol: float = PROXIMAL_TOL) -> Subspace:
    """Span of generalized eigenspaces with magnitude <= lambda_{d-k+1} (ties included)."""
    a = _as_matrix(a)
    d = a.shape[0]
    if not 0 <= k <= d:
        raise ValueError(f"k={k} outside 0..{d}")
    if k == 0:
        return Subspace.zero(d, a.dtype)
    spec = eigen_magnitudes(a)
    mags = spec.magnitudes
    selected = mags <= spec[d - k + 1] + tol * spec[1]
    if selected.all():
        return Subspace(np.eye(d, dtype=a.dtype))
    lo = mags[~selected].min()
    cut = (mags[selected].max() + lo) / 2
    sub = _sorted_invariant_subspace(a, lambda r: r < cut)
    if sub.dim != int(selected.sum()):
        raise EigenSolverError("Schur reordering lost eigenvalues across the threshold")
    return sub


def attracting_flag(a, theta, tol: float = PROXIMAL_TOL) -> Flag:
    a = _as_matrix(a)
    th = as_theta(theta, a.shape[0])
    if not is_proximal(a, th, tol):
        raise NotProximalError(f"matrix is not proximal at theta={th.members}")
    return Flag(th, {k: attracting_subspace(a, k, tol) for k in th})


def repelling_flag(a, theta, tol: float = PROXIMAL_TOL) -> Flag:
    """Repelling flag of signature iota(theta)."""
    a = _as_matrix(a)
    d = a.shape[0]
    th = as_theta(theta, d)
    if not is_proximal(a, th, tol):
        raise NotProximalError(f"matrix is not proximal at theta={th.members}")
    sig = ThetaSet(d, tuple(d - k for k in th))
    return Flag(sig, {k: repelling_subspace(a, k, tol) for k in sig})
