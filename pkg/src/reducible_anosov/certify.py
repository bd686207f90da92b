"""Empirical Anosov certification over conjugacy classes up to a length bound.

A finite length bound can only ever give evidence: ``not_anosov`` is definitive
(a non-proximal class, or two classes with different large eigenvalue
configurations), while ``plausibly_anosov`` means the gap series looks linearly
growing on the enumerated classes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .blocks import RepSpec
from .configs import (
    EigConfig,
    TieAmbiguityError,
    block_spectra,
    block_thetas,
    config_from_spectra,
    half_bound_check,
    iota_set,
)
from .spectra import (
    PROXIMAL_TOL,
    NotProximalError,
    SpectralError,
    ThetaSet,
    as_theta,
    eigen_magnitudes,
)
from .words import ClassRep, enumerate_classes

log = logging.getLogger(__name__)

PLAUSIBLE = "plausibly_anosov"
NOT_ANOSOV = "not_anosov"
INCONCLUSIVE = "inconclusive"

THREADS_ENV = "REDUCIBLE_ANOSOV_THREADS"


@dataclass(frozen=True)
class Thresholds:
    ratio_floor: float = 0.05
    top_fraction: float = 1 / 3
    tol: float = PROXIMAL_TOL
    n_witnesses: int = 3


@dataclass
class GapSample:
    class_rep: ClassRep
    length: int
    gaps: dict[int, float]
    nonproximal: tuple[int, ...] = ()
    config: EigConfig | None = None
    config_failure: str | None = None
    block_mags: tuple[np.ndarray, ...] | None = None
    error: str | None = None

    @property
    def word(self) -> str:
        return str(self.class_rep.word)


def _sample(rep: RepSpec, theta: ThetaSet, cr: ClassRep, tol: float) -> GapSample:
    w = cr.word
    try:
        mat = rep(w)
        spec = eigen_magnitudes(mat)
    except SpectralError as exc:
        return GapSample(cr, len(w), {}, error=str(exc))
    lam1 = spec[1]
    gaps, bad = {}, []
    for k in theta:
        if spec[k] - spec[k + 1] <= tol * lam1:
            bad.append(k)
        else:
            gaps[k] = math.log(spec[k] / spec[k + 1])
    sample = GapSample(cr, len(w), gaps, tuple(bad))
    if rep.block_structured:
        try:
            bs = block_spectra(mat, rep.decomposition)
            sample.block_mags = tuple(s.magnitudes for s in bs)
            sample.config = config_from_spectra(bs, rep.decomposition, theta, tol)
        except TieAmbiguityError as exc:
            sample.config_failure = f"tie: {exc}"
        except NotProximalError as exc:
            sample.config_failure = f"non-proximal: {exc}"
        except SpectralError as exc:
            sample.error = str(exc)
    return sample


def _sample_chunk(args) -> list[GapSample]:
    rep, theta, chunk, tol = args
    return [_sample(rep, theta, cr, tol) for cr in chunk]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def gap_series(rep: RepSpec, theta, max_length: int, *, tol: float = PROXIMAL_TOL,
               workers: int | None = None) -> Iterator[GapSample]:
    """One sample per primitive conjugacy class with translation length <= max_length.

    Output order is (length, canonical word) regardless of ``workers``.
    """
    th = as_theta(theta, rep.dim)
    classes = enumerate_classes(rep.group, max_length, primitive_only=True)
    workers = worker_count() if workers is None else workers
    if workers <= 1:
        for cr in classes:
            yield _sample(rep, th, cr, tol)
        return
    classes = list(classes)
    size = max(64, len(classes) // (4 * workers) + 1)
    chunks = [classes[i : i + size] for i in range(0, len(classes), size)]
    bare = RepSpec(rep.group, rep.decomposition, rep.images, rep.structure, rep.scalar_field)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for out in pool.map(_sample_chunk, [(bare, th, c, tol) for c in chunks]):
            yield from out


@dataclass
class GapStats:
    k: int
    min_ratio: float
    min_ratio_top: float
    slope: float
    intercept: float
    witnesses: list[dict]
    min_gap_by_length: dict[int, float]

    def passes(self, th: Thresholds) -> bool:
        return self.min_ratio_top >= th.ratio_floor and self.slope > 0


@dataclass
class CertReport:
    theta: tuple[int, ...]
    dim: int
    max_length: int
    verdict: str
    stats: dict[int, GapStats]
    config_consistent: bool | None
    unique_config: EigConfig | None
    violations: list[dict]
    block_verdicts: list[dict]
    thresholds: Thresholds
    n_samples: int
    n_failures: int
    half_bound_ok: bool | None = None
    samples: list[GapSample] = field(default_factory=list, repr=False)

    def to_json(self) -> dict:
        return {
            "theta": list(self.theta),
            "dim": self.dim,
            "max_length": self.max_length,
            "verdict": self.verdict,
            "n_samples": self.n_samples,
            "n_failures": self.n_failures,
            "thresholds": asdict(self.thresholds),
            "config_consistent": self.config_consistent,
            "unique_config": self.unique_config.to_json() if self.unique_config else None,
            "half_bound_ok": self.half_bound_ok,
            "gaps": {
                str(k): {
                    "min_ratio": s.min_ratio,
                    "min_ratio_top_band": s.min_ratio_top,
                    "slope": s.slope,
                    "intercept": s.intercept,
                    "min_gap_by_length": {str(l): v for l, v in s.min_gap_by_length.items()},
                    "worst": s.witnesses,
                }
                for k, s in self.stats.items()
            },
            "violations": self.violations,
            "block_verdicts": self.block_verdicts,
        }


def series_csv(samples: Iterable[GapSample]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["word", "length", "k", "gap"])
    for s in samples:
        for k in sorted(s.gaps):
            writer.writerow([s.word, s.length, k, repr(s.gaps[k])])
    return buf.getvalue()


def top_band_start(max_length: int, top_fraction: float = 1 / 3) -> int:
    return max(1, math.ceil((1 - top_fraction) * max_length - 1e-12))


def _gap_stats(k: int, points: list[tuple[str, int, float]], max_length: int, th: Thresholds) -> GapStats:
    """points: (word, length, gap) for every sample proximal at k."""
    by_len: dict[int, float] = {}
    for _, length, gap in points:
        by_len[length] = min(by_len.get(length, math.inf), gap)
    ratios = sorted(((gap / length, word, length, gap) for word, length, gap in points),
                    key=lambda t: (t[0], t[2], t[1]))
    band = top_band_start(max_length, th.top_fraction)
    top = [r for r in ratios if r[2] >= band]
    lengths = sorted(by_len)
    if len(lengths) >= 2:
        slope, intercept = np.polyfit(np.array(lengths, float), np.array([by_len[l] for l in lengths]), 1)
    else:
        slope, intercept = math.nan, math.nan
    return GapStats(
        k=k,
        min_ratio=ratios[0][0] if ratios else math.nan,
        min_ratio_top=top[0][0] if top else math.nan,
        slope=float(slope),
        intercept=float(intercept),
        witnesses=[{"word": w, "length": l, "gap": g, "ratio": r} for r, w, l, g in ratios[: th.n_witnesses]],
        min_gap_by_length=by_len,
    )


def _aggregate(points_by_k: dict[int, list], nonprox: list[dict], max_length: int,
               th: Thresholds) -> tuple[str, dict[int, GapStats]]:
    stats = {k: _gap_stats(k, pts, max_length, th) for k, pts in points_by_k.items()}
    if nonprox:
        return NOT_ANOSOV, stats
    if all(s.passes(th) for s in stats.values()):
        return PLAUSIBLE, stats
    return INCONCLUSIVE, stats


def certify(rep: RepSpec, theta, max_length: int, thresholds: Thresholds | None = None, *,
            workers: int | None = None, keep_samples: bool = False) -> CertReport:
    th_cfg = thresholds or Thresholds()
    theta = as_theta(theta, rep.dim)
    if max_length < 2:
        raise ValueError("certification needs max_length >= 2")
    samples = list(gap_series(rep, theta, max_length, tol=th_cfg.tol, workers=workers))

    violations: list[dict] = []
    points_by_k: dict[int, list] = {k: [] for k in theta}
    failures = 0
    configs: dict[EigConfig, GapSample] = {}
    for s in samples:
        if s.error:
            failures += 1
            continue
        for k in s.nonproximal:
            violations.append({"word": s.word, "length": s.length, "k": k, "reason": "non-proximal"})
        for k, g in s.gaps.items():
            points_by_k[k].append((s.word, s.length, g))
        if s.config_failure and not s.nonproximal:
            violations.append({"word": s.word, "length": s.length, "reason": s.config_failure})
        if s.config is not None and s.config not in configs:
            configs[s.config] = s

    unique_config = None
    consistent = None
    if rep.block_structured and theta.members:
        consistent = len(configs) <= 1
        if len(configs) == 1:
            unique_config = next(iter(configs))
        elif len(configs) > 1:
            first, *others = configs.items()
            for cfg, s in others:
                violations.append({
                    "word": s.word, "length": s.length, "reason": "configuration differs",
                    "config": cfg.to_json(), "reference_word": first[1].word,
                    "reference_config": first[0].to_json(),
                })

    if not theta.members:
        verdict, stats = PLAUSIBLE, {}
    else:
        verdict, stats = _aggregate(points_by_k, violations, max_length, th_cfg)
        if violations:
            verdict = NOT_ANOSOV
        elif failures and verdict == PLAUSIBLE:
            verdict = INCONCLUSIVE

    block_verdicts = []
    if unique_config is not None:
        for j, th_j in enumerate(block_thetas(unique_config)):
            entry = {"block": j + 1, "theta": list(th_j.members)}
            if not th_j.members:
                entry["verdict"] = "vacuous"
            else:
                pts = {q: [] for q in th_j}
                bad = []
                for s in samples:
                    if s.block_mags is None:
                        continue
                    mags = s.block_mags[j]
                    for q in th_j:
                        hi, lo = mags[q - 1], mags[q]
                        if hi - lo <= th_cfg.tol * mags[0]:
                            bad.append({"word": s.word, "k": q})
                        else:
                            pts[q].append((s.word, s.length, math.log(hi / lo)))
                v, st = _aggregate(pts, bad, max_length, th_cfg)
                entry["verdict"] = v
                entry["min_ratio"] = {str(q): st[q].min_ratio for q in st}
            block_verdicts.append(entry)

    half_ok = None
    if verdict == PLAUSIBLE and unique_config is not None:
        half_ok = half_bound_check(unique_config)
        log.info("plausible configuration", extra={"eig_config": unique_config, "half_bound_ok": half_ok})

    return CertReport(
        theta=theta.members,
        dim=rep.dim,
        max_length=max_length,
        verdict=verdict,
        stats=stats,
        config_consistent=consistent,
        unique_config=unique_config,
        violations=violations,
        block_verdicts=block_verdicts,
        thresholds=th_cfg,
        n_samples=len(samples),
        n_failures=failures,
        half_bound_ok=half_ok,
        samples=samples if keep_samples else [],
    )


def involution_crosscheck(rep: RepSpec, theta, max_length: int, thresholds: Thresholds | None = None) -> bool:
    th = as_theta(theta, rep.dim)
    a = certify(rep, th, max_length, thresholds)
    b = certify(rep, iota_set(th), max_length, thresholds)
    return a.verdict == b.verdict
