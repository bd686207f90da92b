"""Block structure relative to a coordinate direct sum decomposition.

A decomposition ``dims = (d_1, ..., d_m)`` splits coordinate space into
consecutive blocks.  Zero-dimensional factors are allowed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .spectra import ThetaSet
from .words import FreeGroup, Word, abelianize

STRUCTURES = ("general", "upper_triangular", "block_diagonal", "block_normalized")
BLOCK_TOL = 1e-12
DET_TOL = 1e-9


class BlockError(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(x) for x in self.dims)
        if not dims or any(x < 0 for x in dims) or sum(dims) == 0:
            raise BlockError(f"invalid block dimensions {self.dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def m(self) -> int:
        return len(self.dims)

    @property
    def total(self) -> int:
        return sum(self.dims)

    @cached_property
    def offsets(self) -> tuple[int, ...]:
        out, acc = [], 0
        for x in self.dims:
            out.append(acc)
            acc += x
        return tuple(out)

    def block(self, j: int) -> slice:
        """Coordinate slice of the j-th factor (0-based)."""
        return slice(self.offsets[j], self.offsets[j] + self.dims[j])

    def prefix(self, j: int) -> slice:
        """Coordinates of U_1 + ... + U_{j+1} (0-based j)."""
        return slice(0, self.offsets[j] + self.dims[j])

    @property
    def nonzero(self) -> tuple[int, ...]:
        return tuple(j for j, x in enumerate(self.dims) if x > 0)

    def flag_signature(self) -> ThetaSet:
        d = self.total
        sums = {self.offsets[j] + self.dims[j] for j in range(self.m)}
        return ThetaSet(d, tuple(s for s in sums if 0 < s < d))

    def deformation_dim(self) -> int:
        return len(self.nonzero) - 1

    def blocks_of(self, a: np.ndarray) -> list[np.ndarray]:
        return [a[self.block(j), self.block(j)] for j in range(self.m)]

    def assemble(self, blocks: Sequence[np.ndarray]) -> np.ndarray:
        if len(blocks) != self.m:
            raise BlockError(f"expected {self.m} blocks, got {len(blocks)}")
        dtype = np.result_type(float, *[np.asarray(b) for b in blocks])
        out = np.zeros((self.total, self.total), dtype=dtype)
        for j, b in enumerate(blocks):
            b = np.asarray(b)
            if b.shape != (self.dims[j], self.dims[j]):
                raise BlockError(f"block {j} has shape {b.shape}, expected {(self.dims[j],) * 2}")
            out[self.block(j), self.block(j)] = b
        return out


def _check_size(a: np.ndarray, dec: Decomposition) -> np.ndarray:
    a = np.asarray(a)
    if a.shape != (dec.total, dec.total):
        raise BlockError(f"matrix shape {a.shape} does not match decomposition of size {dec.total}")
    return a


def _block_mask(dec: Decomposition, upper: bool) -> np.ndarray:
    # True where entries must vanish
    labels = np.repeat(np.arange(dec.m), dec.dims)
    rows, cols = np.meshgrid(labels, labels, indexing="ij")
    return rows > cols if upper else rows != cols


def _vanishes(a: np.ndarray, mask: np.ndarray, tol: float) -> bool:
    scale = np.linalg.norm(a, 2) if a.size else 0.0
    return bool(np.all(np.abs(a[mask]) <= tol * scale))


def is_block_diagonal(a, dec: Decomposition, tol: float = BLOCK_TOL) -> bool:
    a = _check_size(a, dec)
    return _vanishes(a, _block_mask(dec, upper=False), tol)


def is_block_upper_triangular(a, dec: Decomposition, tol: float = BLOCK_TOL) -> bool:
    a = _check_size(a, dec)
    return _vanishes(a, _block_mask(dec, upper=True), tol)


def block_diagonalize(a, dec: Decomposition, tol: float = BLOCK_TOL) -> np.ndarray:
    """Direct sum of the diagonal blocks of a block upper triangular matrix."""
    a = _check_size(a, dec)
    if not is_block_upper_triangular(a, dec, tol):
        raise BlockError("matrix is not block upper triangular for this decomposition")
    out = np.zeros_like(a)
    for j in range(dec.m):
        s = dec.block(j)
        out[s, s] = a[s, s]
    return out


def c_matrix(dec: Decomposition) -> np.ndarray:
    """Block scalar conjugator exp(j - floor(m/2) - 1) on the j-th factor (1-based j)."""
    scal = [math.exp(j - dec.m // 2 - 1) for j in range(1, dec.m + 1)]
    return np.diag(np.repeat(scal, dec.dims))


def conjugation_limit_error(a, dec: Decomposition, n_max: int = 20) -> np.ndarray:
    """||C^n A C^-n - B(A)||_2 for n = 0..n_max; computed from the scalar powers."""
    a = _check_size(a, dec)
    b = block_diagonalize(a, dec)
    c = np.diag(c_matrix(dec))
    errs = []
    for n in range(n_max + 1):
        cn = c**n
        conj = (cn[:, None] * a) / cn[None, :]
        errs.append(np.linalg.norm(conj - b, 2))
    return np.array(errs)


def normalize(a) -> np.ndarray:
    """A / |det A|^(1/d)."""
    a = np.asarray(a)
    d = a.shape[0]
    if d == 0:
        return a
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0 or not np.isfinite(logdet):
        raise BlockError("cannot normalize a singular matrix")
    return a / math.exp(logdet / d)


def log_abs_det(a) -> float:
    a = np.asarray(a)
    if a.shape[0] == 0:
        return 0.0
    sign, logdet = np.linalg.slogdet(a)
    if sign == 0 or not np.isfinite(logdet):
        raise BlockError("singular matrix")
    return float(logdet)


def check_deform_vector(x, dec: Decomposition, tol: float = 1e-9) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dec.m,):
        raise BlockError(f"deformation vector has shape {x.shape}, expected ({dec.m},)")
    if abs(float(np.dot(dec.dims, x))) > tol * max(1.0, float(np.abs(x).max(initial=0))):
        raise BlockError(f"deformation vector {x} violates sum d_j x_j = 0")
    for j, dj in enumerate(dec.dims):
        if dj == 0 and x[j] != 0:
            raise BlockError(f"x_{j + 1} must vanish on a zero-dimensional factor")
    return x


def is_block_normalized(a, dec: Decomposition, tol: float = DET_TOL) -> bool:
    if not is_block_diagonal(a, dec):
        return False
    for b in dec.blocks_of(np.asarray(a)):
        if b.shape[0] and abs(abs(np.linalg.det(b)) - 1) > tol:
            return False
    return True


def psi(s: float, x, blocks: Sequence[np.ndarray], dec: Decomposition) -> np.ndarray:
    """Block diagonal matrix with j-th block exp(s + x_j) B_j."""
    x = check_deform_vector(x, dec)
    return dec.assemble([math.exp(s + x[j]) * np.asarray(b) for j, b in enumerate(blocks)])


def psi_inverse(a, dec: Decomposition) -> tuple[float, np.ndarray, list[np.ndarray]]:
    a = _check_size(a, dec)
    if not is_block_diagonal(a, dec):
        raise BlockError("psi_inverse needs a block diagonal matrix")
    s = log_abs_det(a) / dec.total
    x = np.zeros(dec.m)
    blocks = []
    for j, b in enumerate(dec.blocks_of(a)):
        if dec.dims[j] == 0:
            blocks.append(b)
            continue
        ld = log_abs_det(b)
        x[j] = ld / dec.dims[j] - s
        blocks.append(b / math.exp(ld / dec.dims[j]))
    return s, x, blocks


@dataclass(frozen=True)
class RepSpec:
    """A representation of a free group given by generator images."""

    group: FreeGroup
    decomposition: Decomposition
    images: tuple[np.ndarray, ...]
    structure: str = "general"
    scalar_field: str = "real"
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.structure not in STRUCTURES:
            raise BlockError(f"unknown structure tag {self.structure!r}")
        if len(self.images) != self.group.rank:
            raise BlockError(f"expected {self.group.rank} generator images, got {len(self.images)}")
        d = self.decomposition.total
        imgs = []
        for name, img in zip(self.group.generator_names, self.images):
            img = np.array(img, dtype=complex if self.scalar_field == "complex" else float)
            if img.shape != (d, d):
                raise BlockError(f"image of {name} has shape {img.shape}, expected {(d, d)}")
            if not np.all(np.isfinite(img)):
                raise BlockError(f"image of {name} has non-finite entries")
            if abs(np.linalg.det(img)) <= 1e-12 * max(1.0, np.linalg.norm(img, 2)) ** d:
                raise BlockError(f"image of {name} is not invertible")
            img.setflags(write=False)
            imgs.append(img)
        object.__setattr__(self, "images", tuple(imgs))
        check = {
            "general": lambda a: True,
            "upper_triangular": lambda a: is_block_upper_triangular(a, self.decomposition),
            "block_diagonal": lambda a: is_block_diagonal(a, self.decomposition),
            "block_normalized": lambda a: is_block_normalized(a, self.decomposition),
        }[self.structure]
        for name, img in zip(self.group.generator_names, imgs):
            if not check(img):
                raise BlockError(f"image of {name} is not {self.structure.replace('_', ' ')}")

    @property
    def dim(self) -> int:
        return self.decomposition.total

    @property
    def block_structured(self) -> bool:
        return self.structure != "general"

    def image(self, name_or_index) -> np.ndarray:
        if isinstance(name_or_index, str):
            return self.images[self.group.generator_names.index(name_or_index)]
        return self.images[name_or_index]

    def __call__(self, w: Word) -> np.ndarray:
        """Evaluate on a word, memoizing prefix products."""
        if w.group != self.group:
            raise BlockError("word belongs to a different group")
        cache = self._cache
        letters = w.letters
        if letters in cache:
            return cache[letters]
        n = len(letters)
        i = n
        while i > 0 and letters[:i] not in cache:
            i -= 1
        mat = cache[letters[:i]] if i else np.eye(self.dim, dtype=self.images[0].dtype)
        for j in range(i, n):
            l = letters[j]
            g = self._gen(l)
            mat = mat @ g
            if len(cache) < 200_000:
                cache[letters[: j + 1]] = mat
        return mat

    def _gen(self, letter: int) -> np.ndarray:
        key = ("gen", letter)
        if key not in self._cache:
            img = self.images[abs(letter) - 1]
            self._cache[key] = img if letter > 0 else np.linalg.inv(img)
        return self._cache[key]

    def conjugate(self, p: np.ndarray) -> "RepSpec":
        pinv = np.linalg.inv(p)
        return RepSpec(self.group, self.decomposition, tuple(p @ a @ pinv for a in self.images),
                       "general", self.scalar_field)

    def block_diagonalization(self) -> "RepSpec":
        if self.structure == "general":
            raise BlockError("representation carries no block structure")
        imgs = tuple(block_diagonalize(a, self.decomposition) for a in self.images)
        structure = self.structure if self.structure != "upper_triangular" else "block_diagonal"
        return RepSpec(self.group, self.decomposition, imgs, structure, self.scalar_field)

    def block_rep(self, j: int) -> tuple[np.ndarray, ...]:
        s = self.decomposition.block(j)
        return tuple(a[s, s] for a in self.images)


def _homomorphism_value(values: Mapping[str, object] | Sequence, w: Word) -> np.ndarray:
    ab = abelianize(w)
    if isinstance(values, Mapping):
        vals = [np.asarray(values[n], dtype=float) for n in w.group.generator_names]
    else:
        vals = [np.asarray(v, dtype=float) for v in values]
    return sum((int(c) * v for c, v in zip(ab, vals)), start=np.zeros_like(vals[0]))


def beta_eval(delta, phi, zeta: RepSpec, w: Word) -> np.ndarray:
    """Evaluate the block diagonal representation with blocks exp(delta + phi_j) zeta_j at w.

    ``delta`` maps generators to reals and ``phi`` maps generators to deformation
    vectors; both are extended to ``w`` through its abelianization.
    """
    if zeta.structure not in ("block_diagonal", "block_normalized"):
        raise BlockError("beta_eval needs a block diagonal zeta")
    dec = zeta.decomposition
    if isinstance(phi, Mapping):
        for v in phi.values():
            check_deform_vector(v, dec)
    else:
        for v in phi:
            check_deform_vector(v, dec)
    s = float(_homomorphism_value(delta, w))
    x = _homomorphism_value(phi, w)
    z = zeta(w)
    return psi(s, x, dec.blocks_of(z), dec)


def deformed_rep(zeta: RepSpec, phi, delta=None) -> RepSpec:
    """Representation beta(delta, phi, zeta) as a RepSpec (block diagonal)."""
    names = zeta.group.generator_names
    if delta is None:
        delta = {n: 0.0 for n in names}
    imgs = tuple(beta_eval(delta, phi, zeta, g) for g in zeta.group.generators())
    return RepSpec(zeta.group, zeta.decomposition, imgs, "block_diagonal", zeta.scalar_field)
