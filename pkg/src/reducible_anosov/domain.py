"""Outer polytope approximations of the Anosov block-deformation domain.

A block deformation is a homomorphism from the free group to the space of
vectors ``x`` with ``sum_j d_j x_j = 0``.  It is stored in reduced coordinates:
for each generator, the values ``x_j`` on every nonzero block except the last,
the last one being eliminated by the linear relation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import lp
from .blocks import Decomposition, RepSpec
from .certify import PLAUSIBLE, Thresholds, certify
from .configs import EigConfig, nonempty_pairs
from .spectra import ThetaSet, as_theta, two_sided_magnitudes
from .words import ClassRep, FreeGroup, abelianize, enumerate_classes

CONTAIN_TOL = 1e-10
REDUNDANCY_TOL = 1e-9
VERTEX_TOL = 1e-9


class DomainError(ValueError):
    pass


class HypothesisError(DomainError):
    """The representation is not certified, so the constraint family does not apply."""


class InfeasibleError(DomainError):
    pass


@dataclass(frozen=True)
class ParamBasis:
    group: FreeGroup
    dec: Decomposition

    @property
    def free_blocks(self) -> tuple[int, ...]:
        return self.dec.nonzero[:-1]

    @property
    def last_block(self) -> int:
        return self.dec.nonzero[-1]

    @property
    def per_generator(self) -> int:
        return len(self.free_blocks)

    @property
    def dim(self) -> int:
        return self.group.rank * self.per_generator

    def embedding(self) -> np.ndarray:
        """(m, r) matrix sending reduced block coordinates to a full deformation vector."""
        dims = self.dec.dims
        e = np.zeros((self.dec.m, self.per_generator))
        for idx, j in enumerate(self.free_blocks):
            e[j, idx] = 1.0
            e[self.last_block, idx] = -dims[j] / dims[self.last_block]
        return e

    def labels(self) -> list[str]:
        return [f"x[{g},{j + 1}]" for g in self.group.generator_names for j in self.free_blocks]

    def phi(self, point) -> dict[str, np.ndarray]:
        """Full deformation vectors per generator from a reduced point."""
        point = np.asarray(point, dtype=float)
        if point.shape != (self.dim,):
            raise DomainError(f"point has shape {point.shape}, expected ({self.dim},)")
        e = self.embedding()
        r = self.per_generator
        return {g: e @ point[i * r : (i + 1) * r] for i, g in enumerate(self.group.generator_names)}

    def point(self, phi: Mapping[str, Sequence[float]]) -> np.ndarray:
        r = self.per_generator
        out = np.zeros(self.dim)
        for i, g in enumerate(self.group.generator_names):
            x = np.asarray(phi[g], dtype=float)
            out[i * r : (i + 1) * r] = x[list(self.free_blocks)]
        return out

    def describe(self) -> dict:
        return {
            "generators": list(self.group.generator_names),
            "dims": list(self.dec.dims),
            "coordinates": self.labels(),
            "eliminated_block": self.last_block + 1,
            "relation": "sum_j dims[j] * x[g,j] = 0; x[g,j] = 0 on zero-dimensional blocks",
        }


@dataclass(frozen=True)
class HalfSpace:
    """coeffs . y < bound."""

    coeffs: np.ndarray
    bound: float
    word: str
    length: int
    i: int  # 0-based block indices
    j: int
    k: int
    sort_key: tuple = field(default=(), compare=False, repr=False)

    @property
    def provenance(self) -> dict:
        return {"word": self.word, "i": self.i + 1, "j": self.j + 1, "k": self.k}

    def to_json(self) -> dict:
        return {"coeffs": [float(c) for c in self.coeffs], "bound": float(self.bound),
                "provenance": self.provenance}


@dataclass
class DomainApprox:
    max_length: int
    halfspaces: list[HalfSpace]
    basis: ParamBasis
    theta: ThetaSet
    config: EigConfig
    diagnostics: dict = field(default_factory=dict)

    @property
    def reduced_dim(self) -> int:
        return self.basis.dim

    @property
    def A(self) -> np.ndarray:
        if not self.halfspaces:
            return np.zeros((0, self.reduced_dim))
        return np.array([h.coeffs for h in self.halfspaces])

    @property
    def b(self) -> np.ndarray:
        return np.array([h.bound for h in self.halfspaces])

    def restrict(self, max_length: int) -> "DomainApprox":
        """Constraint set from classes of length <= max_length."""
        hs = self.diagnostics.get("_raw")
        if hs is None:
            raise DomainError("domain was built without raw constraints")
        kept = _merge([h for h in hs if h.length <= max_length])
        return DomainApprox(max_length, kept, self.basis, self.theta, self.config,
                            {"_raw": [h for h in hs if h.length <= max_length]})

    def to_json(self) -> dict:
        return {
            "max_length": self.max_length,
            "reduced_dim": self.reduced_dim,
            "basis": self.basis.describe(),
            "theta": list(self.theta.members),
            "config": self.config.to_json(),
            "halfspaces": [h.to_json() for h in self.halfspaces],
            "diagnostics": {k: v for k, v in self.diagnostics.items() if not k.startswith("_")},
        }


def _direction_key(c: np.ndarray) -> tuple:
    return tuple(np.round(c / np.linalg.norm(c), 12) + 0.0)


def _merge(hs: Iterable[HalfSpace]) -> list[HalfSpace]:
    """Keep one half-space per normal direction, the one with the smallest
    bound / |coeffs| (positive multiples describe the same half-space)."""
    best: dict[tuple, tuple[float, HalfSpace]] = {}
    for h in hs:
        key = _direction_key(h.coeffs)
        level = h.bound / float(np.linalg.norm(h.coeffs))
        cur = best.get(key)
        if cur is None or level < cur[0] - 1e-15 or (abs(level - cur[0]) <= 1e-15 and h.sort_key < cur[1].sort_key):
            best[key] = (level, h)
    return sorted((h for _, h in best.values()), key=lambda h: h.sort_key)


def raw_constraints(zeta: RepSpec, cfg: EigConfig, classes: Iterable[ClassRep]) -> list[HalfSpace]:
    """All nontrivial half-spaces, one per (class, k, i != j) with nonzero coefficients."""
    if zeta.structure not in ("block_diagonal", "block_normalized"):
        raise DomainError("constraints need a block diagonal representation")
    dec = zeta.decomposition
    basis = ParamBasis(zeta.group, dec)
    emb = basis.embedding()
    pairs = {k: sorted(p for p in nonempty_pairs(cfg, k) if p[0] != p[1]) for k in cfg.theta}
    out = []
    for cr in classes:
        if not cr.is_primitive:
            continue
        w = cr.word
        # the small magnitudes come from the inverse word, which keeps them accurate
        pieces = zip(dec.blocks_of(zeta(w)), dec.blocks_of(zeta(~w)))
        spectra = [two_sided_magnitudes(b, bi) if b.shape[0] else None for b, bi in pieces]
        ab = abelianize(w).astype(float)
        for k in cfg.theta:
            for i, j in pairs[k]:
                bound = math.log(spectra[i][cfg(i, k) - 1] / spectra[j][cfg(j, k)])
                if not bound > 0:
                    raise DomainError(
                        f"non-positive bound {bound:.3g} for class {w} at k={k}, (i,j)=({i + 1},{j + 1}); "
                        "the configuration is inconsistent with this class"
                    )
                coeffs = np.kron(ab, emb[j] - emb[i])
                if not np.any(np.abs(coeffs) > 1e-14):
                    continue
                out.append(HalfSpace(coeffs, bound, str(w), len(w), i, j, k,
                                     sort_key=(len(w), w.key(), k, i, j)))
    return out


def build_domain(zeta: RepSpec, theta, max_length: int, *, config: EigConfig | None = None,
                 thresholds: Thresholds | None = None) -> DomainApprox:
    """Outer approximation from all primitive classes of length <= max_length.

    Without an explicit ``config`` the representation is certified first, and the
    unique large eigenvalue configuration found there is used."""
    th = as_theta(theta, zeta.dim)
    if config is None:
        report = certify(zeta, th, max(max_length, 2), thresholds)
        if report.verdict != PLAUSIBLE or report.unique_config is None:
            raise HypothesisError(
                f"representation is not certified at theta={th.members}, L={max_length}: "
                f"verdict {report.verdict}"
            )
        config = report.unique_config
    classes = enumerate_classes(zeta.group, max_length, primitive_only=True)
    raw = raw_constraints(zeta, config, classes)
    basis = ParamBasis(zeta.group, zeta.decomposition)
    merged = _merge(raw)
    history = {str(l): len(_merge(h for h in raw if h.length <= l)) for l in range(1, max_length + 1)}
    return DomainApprox(max_length, merged, basis, th, config,
                        {"constraints_by_length": history, "_raw": raw})


def constraints(zeta: RepSpec, theta, max_length: int, *,
                thresholds: Thresholds | None = None) -> list[HalfSpace]:
    """Merged half-spaces of A_L for a certified block normalized ``zeta``."""
    return list(build_domain(zeta, theta, max_length, thresholds=thresholds).halfspaces)


def contains(domain: DomainApprox, point, tol: float = CONTAIN_TOL) -> bool:
    point = np.asarray(point, dtype=float)
    if point.shape != (domain.reduced_dim,):
        raise DomainError(f"point has shape {point.shape}, expected ({domain.reduced_dim},)")
    if not domain.halfspaces:
        return True
    return bool(np.all(domain.A @ point < domain.b - tol))


def margin(domain: DomainApprox, point) -> float:
    """1 - max_i (c_i . y / b_i); positive inside the outer approximation."""
    if not domain.halfspaces:
        return 1.0
    return float(1 - np.max(domain.A @ np.asarray(point, float) / domain.b))


def _ab(h) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(h, DomainApprox):
        return h.A, h.b
    if isinstance(h, tuple) and len(h) == 2:
        a, b = h
        return np.atleast_2d(np.asarray(a, float)), np.asarray(b, float)
    hs = list(h)
    return np.array([x.coeffs for x in hs], float), np.array([x.bound for x in hs], float)


def redundant_mask(h) -> np.ndarray:
    """True where a constraint is implied by the others (one LP per constraint)."""
    a, b = _ab(h)
    if a.shape[0] == 0:
        return np.zeros(0, bool)
    out = np.zeros(len(b), bool)
    # later copies of the same half-space (up to positive scaling) are redundant
    norms = np.linalg.norm(a, axis=1)
    seen: dict[tuple, int] = {}
    for i in range(len(b)):
        if norms[i] == 0:
            continue
        key = tuple(np.round(np.append(a[i], b[i]) / norms[i], 12) + 0.0)
        if key in seen:
            out[i] = True
        else:
            seen[key] = i
    for i in range(len(b)):
        if out[i]:
            continue
        others = np.flatnonzero(~out)
        others = others[others != i]
        # cap the objective so the LP stays bounded; a capped optimum means irredundant
        a_i = np.vstack([a[others], a[i]])
        b_i = np.append(b[others], b[i] + 1.0)
        res = lp.maximize(a[i], a_i, b_i)
        if res.status == lp.INFEASIBLE:
            raise InfeasibleError("constraint system is infeasible")
        out[i] = res.status == lp.OPTIMAL and res.value < b[i] - REDUNDANCY_TOL
    return out


def remove_redundant(h):
    """Drop redundant constraints; returns the same kind of object it was given."""
    mask = ~redundant_mask(h)
    if isinstance(h, DomainApprox):
        return DomainApprox(h.max_length, [x for x, keep in zip(h.halfspaces, mask) if keep],
                            h.basis, h.theta, h.config, {"constraints_by_length": h.diagnostics.get("constraints_by_length")})
    if isinstance(h, tuple):
        a, b = _ab(h)
        return a[mask], b[mask]
    return [x for x, keep in zip(h, mask) if keep]


def chebyshev_center(h) -> tuple[np.ndarray | None, float]:
    """Center and radius of the largest inscribed ball; radius is inf if unbounded."""
    a, b = _ab(h)
    n = a.shape[1]
    if n == 0:
        return np.zeros(0), 0.0
    norms = np.linalg.norm(a, axis=1)
    a_ext = np.vstack([np.hstack([a, norms[:, None]]), np.append(np.zeros(n), -1.0)])
    b_ext = np.append(b, 0.0)
    c = np.append(np.zeros(n), 1.0)
    res = lp.maximize(c, a_ext, b_ext)
    if res.status == lp.INFEASIBLE:
        raise InfeasibleError("constraint system is infeasible")
    if res.status == lp.UNBOUNDED:
        return None, math.inf
    return res.point[:n], float(res.point[n])


def is_bounded(h) -> bool:
    a, b = _ab(h)
    n = a.shape[1]
    for i in range(n):
        for sgn in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = sgn
            res = lp.maximize(c, a, b)
            if res.status == lp.INFEASIBLE:
                raise InfeasibleError("constraint system is infeasible")
            if res.status == lp.UNBOUNDED:
                return False
    return True


def bounding_box(h) -> tuple[np.ndarray, np.ndarray]:
    a, b = _ab(h)
    n = a.shape[1]
    lo, hi = np.zeros(n), np.zeros(n)
    for i in range(n):
        c = np.zeros(n)
        c[i] = 1.0
        top = lp.maximize(c, a, b)
        bot = lp.minimize(c, a, b)
        for res in (top, bot):
            if res.status == lp.INFEASIBLE:
                raise InfeasibleError("constraint system is infeasible")
            if res.status == lp.UNBOUNDED:
                raise DomainError("polytope is unbounded")
        lo[i], hi[i] = bot.value, top.value
    return lo, hi


def vertices(h) -> np.ndarray:
    """Vertices by exhaustive basis enumeration (dimension <= 3)."""
    a, b = _ab(h)
    n = a.shape[1]
    if n > 3:
        raise DomainError(f"vertex enumeration is limited to dimension <= 3, got {n}")
    if n == 0:
        return np.zeros((1, 0))
    found = []
    for rows in itertools.combinations(range(len(b)), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(a @ v <= b + VERTEX_TOL * np.maximum(1.0, np.abs(b))):
            if not any(np.allclose(v, u, atol=1e-9) for u in found):
                found.append(v)
    return np.array(found).reshape(-1, n)


def mc_volume(h, sample_count: int = 100_000, seed: int = 0) -> tuple[float, float]:
    """Rejection-sampled volume inside the axis-aligned bounding box; (volume, std. error)."""
    a, b = _ab(h)
    lo, hi = bounding_box((a, b))
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(sample_count, a.shape[1]))
    frac = float(np.mean(np.all(pts @ a.T <= b, axis=1)))
    box = float(np.prod(hi - lo))
    return box * frac, box * math.sqrt(frac * (1 - frac) / sample_count)


def slice_polygon(h, plane: tuple[int, int], origin=None) -> np.ndarray:
    """Vertices (counterclockwise) of the 2D slice through ``origin`` spanned by two axes."""
    a, b = _ab(h)
    n = a.shape[1]
    i, j = plane
    if not (0 <= i < n and 0 <= j < n and i != j):
        raise DomainError(f"invalid plane {plane} for dimension {n}")
    origin = np.zeros(n) if origin is None else np.asarray(origin, float)
    a2 = a[:, [i, j]]
    b2 = b - a @ origin
    live = np.linalg.norm(a2, axis=1) > 1e-14
    if np.any(b2[~live] < 0):
        raise InfeasibleError("slice is empty")
    a2, b2 = a2[live], b2[live]
    if not is_bounded((a2, b2)):
        raise DomainError("slice is unbounded")
    verts = vertices((a2, b2))
    if len(verts) == 0:
        raise InfeasibleError("slice is empty")
    center = verts.mean(axis=0)
    order = np.argsort(np.arctan2(verts[:, 1] - center[1], verts[:, 0] - center[0]), kind="stable")
    return verts[order]


@dataclass
class ConvergenceReport:
    lengths: list[int]
    rows: list[dict]
    stable: bool
    insufficient_data: bool

    def to_json(self) -> dict:
        return {"lengths": self.lengths, "rows": self.rows, "stable": self.stable,
                "insufficient_data": self.insufficient_data}


def convergence_experiment(zeta: RepSpec, theta, lengths: Sequence[int], *,
                           thresholds: Thresholds | None = None) -> ConvergenceReport:
    """Track the irredundant constraint set of A_L across ``lengths``."""
    lengths = sorted(set(int(l) for l in lengths))
    if not lengths:
        raise DomainError("empty length range")
    full = build_domain(zeta, theta, lengths[-1], thresholds=thresholds)
    rows, keysets = [], []
    for L in lengths:
        dom = full.restrict(L)
        irr = remove_redundant(dom)
        _, radius = chebyshev_center(dom)
        keys = sorted((h.word, h.k, h.i + 1, h.j + 1) for h in irr.halfspaces)
        keysets.append(keys)
        rows.append({
            "L": L,
            "n_constraints": len(dom.halfspaces),
            "n_irredundant": len(irr.halfspaces),
            "irredundant": [{"word": w, "k": k, "i": i, "j": j} for w, k, i, j in keys],
            "chebyshev_radius": radius,
            "bounded": is_bounded(dom),
        })
    if len(lengths) == 1:
        return ConvergenceReport(lengths, rows, True, True)
    band = max(2, math.ceil(len(lengths) / 3))
    tail = keysets[-band:]
    return ConvergenceReport(lengths, rows, all(t == tail[0] for t in tail), False)
