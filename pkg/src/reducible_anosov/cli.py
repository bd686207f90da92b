"""Command-line interface.

Exit codes: 0 success, 2 computed verdict ``not_anosov``, 1 anything that could
not be computed (bad input, failed hypothesis, numerical failure).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .blocks import BlockError, RepSpec, psi_inverse
from .certify import NOT_ANOSOV, Thresholds, certify, series_csv
from .configs import ConfigError, large_config
from .domain import (
    DomainError,
    bounding_box,
    build_domain,
    chebyshev_center,
    convergence_experiment,
    is_bounded,
    redundant_mask,
    slice_polygon,
)
from .io import ConfigFileError, dumps, load_rep, manifest, rep_to_json
from .lp import LPError
from .spectra import SpectralError, ThetaSet
from .words import WordError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_ANOSOV = 2

log = logging.getLogger("reducible_anosov")

_EXPECTED = (ConfigFileError, BlockError, ConfigError, DomainError, SpectralError, WordError, LPError, OSError)


class UsageError(ValueError):
    pass


def parse_theta(text: str | None, d: int) -> ThetaSet:
    """"1,2" or "all" (every k) or "none" (empty set)."""
    if text is None or text.strip().lower() == "all":
        return ThetaSet.full(d)
    text = text.strip().lower()
    if text in ("none", "", "{}"):
        return ThetaSet(d, ())
    try:
        ks = tuple(int(t) for t in text.strip("{}").replace(" ", "").split(",") if t)
    except ValueError:
        raise UsageError(f"cannot parse theta {text!r}; expected e.g. '1,2'") from None
    try:
        return ThetaSet(d, ks)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _thresholds(args) -> Thresholds:
    return Thresholds(ratio_floor=args.ratio_floor, top_fraction=args.top_fraction, tol=args.tol)


def _write_text(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _csv_with_manifest(man: dict, body: str) -> str:
    return "# manifest: " + json.dumps(man, sort_keys=True, separators=(",", ":")) + "\n" + body


def cmd_validate(args) -> int:
    rep, digest = load_rep(args.config)
    checks = {"parsed": True, "invertible": True, "structure": rep.structure}
    if rep.structure == "block_normalized":
        dets = []
        for a in rep.images:
            dets.append([float(abs(np.linalg.det(b))) for b in rep.decomposition.blocks_of(a) if b.shape[0]])
        checks["block_abs_dets"] = dets
    report = {
        "manifest": manifest("validate", {}, digest),
        "valid": True,
        "rank": rep.group.rank,
        "generators": list(rep.group.generator_names),
        "dims": list(rep.decomposition.dims),
        "scalar_field": rep.scalar_field,
        "checks": checks,
    }
    _write_text(args.out, dumps(report))
    return EXIT_OK


def cmd_certify(args) -> int:
    rep, digest = load_rep(args.config)
    theta = parse_theta(args.theta, rep.dim)
    th = _thresholds(args)
    report = certify(rep, theta, args.max_len, th, keep_samples=args.csv is not None)
    params = {"theta": list(theta.members), "max_length": args.max_len, "thresholds": asdict(th)}
    man = manifest("certify", params, digest)
    doc = {"manifest": man, "report": report.to_json()}
    _write_text(args.out, dumps(doc))
    if args.csv:
        Path(args.csv).write_text(_csv_with_manifest(man, series_csv(report.samples)))
    if args.out not in (None, "-"):
        print(f"verdict: {report.verdict}")
    return EXIT_NOT_ANOSOV if report.verdict == NOT_ANOSOV else EXIT_OK


def cmd_eigconfig(args) -> int:
    rep, digest = load_rep(args.config)
    if not rep.block_structured:
        raise UsageError("eigconfig needs a block structured representation (structure tag other than 'general')")
    theta = parse_theta(args.theta, rep.dim)
    w = rep.group.parse(args.word)
    cfg = large_config(rep(w), rep.decomposition, theta, args.tol)
    print(f"word: {w}")
    print(cfg.table())
    if args.out:
        params = {"word": str(w), "theta": list(theta.members), "tol": args.tol}
        Path(args.out).write_text(dumps({"manifest": manifest("eigconfig", params, digest), "config": cfg.to_json()}))
    return EXIT_OK


def cmd_domain(args) -> int:
    rep, digest = load_rep(args.config)
    if rep.structure != "block_normalized":
        raise UsageError("domain needs a block_normalized representation; run normalize-rep first")
    theta = parse_theta(args.theta, rep.dim)
    th = _thresholds(args)
    dom = build_domain(rep, theta, args.max_len, thresholds=th)
    body = dom.to_json()
    if dom.halfspaces:
        mask = redundant_mask(dom)
        body["irredundant"] = [i for i, r in enumerate(mask) if not r]
        bounded = is_bounded(dom)
        body["bounded"] = bounded
        center, radius = chebyshev_center(dom)
        body["chebyshev_center"] = None if center is None else [float(v) for v in center]
        body["chebyshev_radius"] = radius
        if bounded:
            lo, hi = bounding_box(dom)
            body["bounding_box"] = {"lo": lo.tolist(), "hi": hi.tolist()}
    else:
        body["irredundant"] = []
        body["bounded"] = dom.reduced_dim == 0
    params = {"theta": list(theta.members), "max_length": args.max_len, "thresholds": asdict(th)}
    _write_text(args.out, dumps({"manifest": manifest("domain", params, digest), "domain": body}))
    return EXIT_OK


def cmd_converge(args) -> int:
    rep, digest = load_rep(args.config)
    if rep.structure != "block_normalized":
        raise UsageError("converge needs a block_normalized representation; run normalize-rep first")
    if args.min_len > args.max_len:
        raise UsageError("--min-len exceeds --max-len")
    theta = parse_theta(args.theta, rep.dim)
    th = _thresholds(args)
    rpt = convergence_experiment(rep, theta, range(args.min_len, args.max_len + 1), thresholds=th)
    params = {"theta": list(theta.members), "min_length": args.min_len, "max_length": args.max_len,
              "thresholds": asdict(th)}
    _write_text(args.out, dumps({"manifest": manifest("converge", params, digest), "convergence": rpt.to_json()}))
    return EXIT_OK


def _plane_axes(spec: str, labels: list[str]) -> tuple[int, int]:
    parts = [p.strip() for p in spec.split(";" if ";" in spec else ",")]
    if len(parts) != 2:
        raise UsageError(f"plane must name two coordinates, got {spec!r}")
    axes = []
    for p in parts:
        if p in labels:
            axes.append(labels.index(p))
            continue
        try:
            axes.append(int(p) - 1)
        except ValueError:
            raise UsageError(f"unknown coordinate {p!r}; expected 1-based index or one of {labels}") from None
    return axes[0], axes[1]


def cmd_slice(args) -> int:
    raw = Path(args.poly).read_bytes()
    try:
        doc = json.loads(raw)
        body = doc["domain"]
        n = int(body["reduced_dim"])
        labels = list(body["basis"]["coordinates"])
        hs = body["halfspaces"]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ConfigFileError(f"{args.poly}: not a domain file ({exc})") from None
    a = np.array([h["coeffs"] for h in hs], float).reshape(len(hs), n)
    b = np.array([h["bound"] for h in hs], float)
    plane = _plane_axes(args.plane, labels)
    origin = None
    if args.origin:
        origin = np.array([float(t) for t in args.origin.split(",")])
        if origin.shape != (n,):
            raise UsageError(f"origin needs {n} coordinates")
    keep = ~redundant_mask((a, b))
    poly = slice_polygon((a[keep], b[keep]), plane, origin)
    params = {"plane": [labels[plane[0]], labels[plane[1]]],
              "origin": None if origin is None else origin.tolist()}
    man = manifest("slice", params, hashlib.sha256(raw).hexdigest())
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([labels[plane[0]], labels[plane[1]]])
    for x, y in poly:
        writer.writerow([repr(float(x)), repr(float(y))])
    _write_text(args.out, _csv_with_manifest(man, buf.getvalue()))
    return EXIT_OK


def cmd_normalize_rep(args) -> int:
    rep, digest = load_rep(args.config)
    if not rep.block_structured:
        raise UsageError("normalize-rep needs a block structured representation")
    if rep.scalar_field == "complex":
        raise UsageError("normalize-rep supports real representations only")
    base = rep.block_diagonalization()
    delta, phi, images = {}, {}, []
    for name, a in zip(rep.group.generator_names, base.images):
        s, x, blocks = psi_inverse(a, rep.decomposition)
        delta[name] = s
        phi[name] = [float(v) for v in x]
        images.append(rep.decomposition.assemble(blocks))
    zeta = RepSpec(rep.group, rep.decomposition, tuple(images), "block_normalized", rep.scalar_field)
    doc = rep_to_json(zeta)
    doc["manifest"] = manifest("normalize-rep", {}, digest)
    doc["deformation"] = {"delta": delta, "phi": phi}
    _write_text(args.out, dumps(doc))
    return EXIT_OK


def _add_thresholds(p: argparse.ArgumentParser) -> None:
    d = Thresholds()
    p.add_argument("--ratio-floor", type=float, default=d.ratio_floor,
                   help="minimum gap/length ratio on the top length band")
    p.add_argument("--top-fraction", type=float, default=d.top_fraction,
                   help="fraction of the length range forming the top band")
    p.add_argument("--tol", type=float, default=d.tol, help="relative proximality tolerance")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reducible-anosov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="load and check a representation config")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("certify", help="empirical Anosov certificate over classes up to a length")
    p.add_argument("config")
    p.add_argument("--theta", help="e.g. '1,2'; 'all' (default) or 'none'")
    p.add_argument("--max-len", type=int, default=10)
    p.add_argument("--out")
    p.add_argument("--csv", help="write the gap series here")
    _add_thresholds(p)
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("eigconfig", help="large eigenvalue configuration of one word")
    p.add_argument("config")
    p.add_argument("--word", required=True)
    p.add_argument("--theta")
    p.add_argument("--tol", type=float, default=Thresholds().tol)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eigconfig)

    p = sub.add_parser("domain", help="outer polytope approximation of the deformation domain")
    p.add_argument("config")
    p.add_argument("--theta")
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--out")
    _add_thresholds(p)
    p.set_defaults(func=cmd_domain)

    p = sub.add_parser("converge", help="irredundant constraint sets across a length range")
    p.add_argument("config")
    p.add_argument("--theta")
    p.add_argument("--min-len", type=int, default=2)
    p.add_argument("--max-len", type=int, default=6)
    p.add_argument("--out")
    _add_thresholds(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("slice", help="2D slice polygon of a domain file")
    p.add_argument("poly")
    p.add_argument("--plane", default="1,2", help="two coordinates, 1-based indices or labels")
    p.add_argument("--origin", help="comma separated base point (default 0)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("normalize-rep", help="split images into scalar, deformation and normalized parts")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_normalize_rep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except _EXPECTED as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
