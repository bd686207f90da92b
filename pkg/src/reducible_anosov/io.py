"""Representation config files, run manifests and JSON output."""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .blocks import STRUCTURES, BlockError, Decomposition, RepSpec
from .words import FreeGroup, WordError


class ConfigFileError(ValueError):
    pass


def parse_entry(value, complex_field: bool):
    """Decimal strings, numbers, or exact rationals "p/q"; evaluated to binary floats."""
    if isinstance(value, bool):
        raise ConfigFileError(f"boolean is not a matrix entry: {value!r}")
    if isinstance(value, (int, float)):
        return complex(value) if complex_field else float(value)
    if isinstance(value, str):
        text = value.strip().replace(" ", "")
        try:
            return float(Fraction(text))
        except (ValueError, ZeroDivisionError):
            pass
        if complex_field:
            try:
                return complex(text.replace("i", "j"))
            except ValueError:
                pass
        raise ConfigFileError(f"cannot parse matrix entry {value!r}")
    raise ConfigFileError(f"cannot parse matrix entry {value!r}")


def parse_matrix(data, d: int, complex_field: bool, where: str) -> np.ndarray:
    if isinstance(data, list) and data and all(isinstance(r, list) for r in data):
        rows = data
        if len(rows) != d or any(len(r) != d for r in rows):
            raise ConfigFileError(f"{where}: expected a {d}x{d} matrix")
        flat = [x for r in rows for x in r]
    else:
        flat = data
        if not isinstance(flat, list) or len(flat) != d * d:
            n = len(flat) if isinstance(flat, list) else "?"
            raise ConfigFileError(f"{where}: expected {d * d} row-major entries, got {n}")
    try:
        vals = [parse_entry(x, complex_field) for x in flat]
    except ConfigFileError as exc:
        raise ConfigFileError(f"{where}: {exc}") from None
    return np.array(vals, dtype=complex if complex_field else float).reshape(d, d)


def rep_from_json(doc: dict) -> RepSpec:
    try:
        g = doc["group"]
        names = tuple(g.get("generators") or ())
        group = FreeGroup(int(g.get("rank", len(names))), names)
        dec = Decomposition(tuple(doc["decomposition"]["dims"]))
        field_name = doc.get("scalar_field", "real")
        if field_name not in ("real", "complex"):
            raise ConfigFileError(f"scalar_field must be 'real' or 'complex', got {field_name!r}")
        cplx = field_name == "complex"
        structure = doc.get("structure", "general")
        if structure not in STRUCTURES:
            raise ConfigFileError(f"structure must be one of {STRUCTURES}, got {structure!r}")
        d = dec.total
        images_doc = doc["images"]
        missing = [n for n in group.generator_names if n not in images_doc]
        if missing:
            raise ConfigFileError(f"images: missing generator(s) {missing}")
        images = [parse_matrix(images_doc[n], d, cplx, f"images.{n}") for n in group.generator_names]
        basis = doc["decomposition"].get("basis")
        if basis is not None:
            p = parse_matrix(basis, d, cplx, "decomposition.basis")
            if abs(np.linalg.det(p)) < 1e-12:
                raise ConfigFileError("decomposition.basis is singular")
            pinv = np.linalg.inv(p)
            images = [pinv @ a @ p for a in images]
        return RepSpec(group, dec, tuple(images), structure, field_name)
    except KeyError as exc:
        raise ConfigFileError(f"missing required field {exc}") from None
    except (BlockError, WordError) as exc:
        raise ConfigFileError(str(exc)) from None


def rep_to_json(rep: RepSpec) -> dict:
    def entry(x):
        if rep.scalar_field == "complex":
            return repr(complex(x))
        return repr(float(x))

    return {
        "group": {"rank": rep.group.rank, "generators": list(rep.group.generator_names)},
        "decomposition": {"dims": list(rep.decomposition.dims)},
        "scalar_field": rep.scalar_field,
        "structure": rep.structure,
        "images": {n: [entry(x) for x in a.ravel()] for n, a in zip(rep.group.generator_names, rep.images)},
    }


def load_rep(path) -> tuple[RepSpec, str]:
    """Load a config file; returns the representation and the sha256 of the file bytes."""
    raw = Path(path).read_bytes()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigFileError(f"{path}: invalid JSON: {exc}") from None
    return rep_from_json(doc), hashlib.sha256(raw).hexdigest()


def manifest(command: str, parameters: dict, input_hash: str | None) -> dict:
    return {"command": command, "parameters": parameters, "tool_version": __version__,
            "input_sha256": input_hash}


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def fixture_path(name: str) -> Path:
    """Path of a shipped fixture config, e.g. ``fixture_path("worked_example")``."""
    if not name.endswith(".json"):
        name += ".json"
    return Path(str(resources.files("reducible_anosov") / "fixtures" / name))


def fixture_names() -> list[str]:
    root = resources.files("reducible_anosov") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))
