"""Random weight cascades on the dyadic filtration.

The density at level ``n`` is constant on dyadic cells ``Q`` of side
``2**-n`` inside ``[0, 1)**d`` and equals the product of the weights along the
ancestor chain of ``Q``. A tree keeps only surviving cells (positive density).

Cells are addressed by a linear index ``sum_j i_j 2**(n j)`` where ``i_j`` is
the integer coordinate along axis ``j``. Every cell weight is drawn from a
stateless hash of (seed, level, index), so regenerating any subtree gives the
same weights regardless of traversal order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    Box,
    DensityEvaluator,
    SeedPath,
    ValidationError,
    as_points,
    counter_uniforms,
    unit_box,
)

MAX_INDEX_BITS = 56


@dataclass(frozen=True)
class WeightLaw:
    """Finite discrete law of a cell weight.

    Attributes
    ----------
    values : tuple of float
        Support points in ``[0, C]``.
    probs : tuple of float
        Probabilities, summing to 1.
    """

    values: tuple
    probs: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        p = tuple(float(x) for x in self.probs)
        if len(v) == 0 or len(v) != len(p):
            raise ValidationError("law needs matching nonempty values and probs")
        if any(x < 0 or not math.isfinite(x) for x in v):
            raise ValidationError("law values must be finite and nonnegative")
        if any(q < 0 for q in p) or abs(math.fsum(p) - 1.0) > 1e-12:
            raise ValidationError("law probabilities must be nonnegative and sum to 1")
        mean = math.fsum(a * b for a, b in zip(v, p))
        if abs(mean - 1.0) > 1e-12:
            raise ValidationError(f"law mean must be 1 within 1e-12, got {mean!r}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @property
    def max_value(self) -> float:
        return max(x for x, q in zip(self.values, self.probs) if q > 0)

    def sample(self, u: np.ndarray) -> np.ndarray:
        """Inverse-CDF draw from uniforms ``u``."""
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        idx = np.searchsorted(cum, u, side="right")
        return np.asarray(self.values)[np.minimum(idx, len(self.values) - 1)]

    @classmethod
    def percolation(cls, p: float) -> "WeightLaw":
        if not (0 < p <= 1):
            raise ValidationError("p must lie in (0, 1]")
        return cls((0.0, 1.0 / p), (1.0 - p, p))


@dataclass(frozen=True)
class SalemLineSpec:
    """Schedule ``N_j`` in {1, 2} with ``P_n = N_1 ... N_n`` close to ``2**(alpha0 n)``.

    ``N_j = 2`` exactly when ``2 P_{j-1} <= 2**(alpha0 j)``; this keeps
    ``P_n / 2**(alpha0 n)`` in ``[1/2, 1]``.
    """

    alpha0: float
    depth: int

    def __post_init__(self):
        if not (0 < self.alpha0 <= 1):
            raise ValidationError("alpha0 must lie in (0, 1]")
        if self.depth < 0:
            raise ValidationError("depth must be >= 0")

    @property
    def schedule(self) -> tuple:
        out = []
        log_p = 0  # log2 P_{j-1}
        for j in range(1, self.depth + 1):
            if log_p + 1 <= self.alpha0 * j + 1e-12:
                out.append(2)
                log_p += 1
            else:
                out.append(1)
        return tuple(out)

    @property
    def products(self) -> tuple:
        """``P_0, ..., P_depth``."""
        p = [1]
        for nj in self.schedule:
            p.append(p[-1] * nj)
        return tuple(p)


def _coords(index: np.ndarray, level: int, d: int) -> np.ndarray:
    mask = (1 << level) - 1
    return np.stack([(index >> (level * j)) & mask for j in range(d)], axis=1)


def _linear(coords: np.ndarray, level: int) -> np.ndarray:
    out = np.zeros(coords.shape[0], dtype=np.int64)
    for j in range(coords.shape[1]):
        out |= coords[:, j].astype(np.int64) << (level * j)
    return out


def _children(index: np.ndarray, level: int, d: int) -> np.ndarray:
    """Linear indices of the ``2**d`` children of each cell, grouped per parent."""
    co = _coords(index, level, d)
    kids = []
    for digit in range(2**d):
        bits = np.array([(digit >> j) & 1 for j in range(d)], dtype=np.int64)
        kids.append(_linear(2 * co + bits, level + 1))
    return np.stack(kids, axis=1).reshape(-1)


@dataclass
class SubdivisionTree:
    """Sparse tree of surviving dyadic cells.

    Attributes
    ----------
    d : int
    depth : int
    index : list of ndarray
        ``index[n]`` holds sorted linear indices of surviving level-n cells.
    weight : list of ndarray
        Weight ``W`` of each cell relative to its parent (1 for the root).
    growth_constant : float
        Upper bound ``C`` of the weights.
    model : dict
        Description of the generating model.
    seed : SeedPath
    """

    d: int
    depth: int
    index: list
    weight: list
    growth_constant: float
    model: dict = field(default_factory=dict)
    seed: SeedPath | None = None
    _density: list = field(default=None, repr=False, compare=False)

    @property
    def alpha(self) -> float:
        """Exponent with ``mu_n <= 2**(alpha n)``: ``log2 C`` (``1 - alpha0`` for Salem lines)."""
        if self.model.get("kind") == "salem-line":
            return 1.0 - float(self.model["alpha0"])
        return math.log2(self.growth_constant) if self.growth_constant > 0 else 0.0

    def density(self, n: int) -> np.ndarray:
        """Density value (product of ancestor weights) of each level-n cell."""
        if self._density is None:
            dens = [np.asarray(self.weight[0], dtype=float)]
            for m in range(1, self.depth + 1):
                # parent of a cell: halve every coordinate
                pco = _coords(self.index[m], m, self.d) >> 1
                pidx = _linear(pco, m - 1)
                pos = np.searchsorted(self.index[m - 1], pidx)
                dens.append(dens[m - 1][pos] * self.weight[m])
            self._density = dens
        return self._density[n]

    def cell_count(self, n: int) -> int:
        return len(self.index[n])

    def total_mass(self, n: int) -> float:
        """``||mu_n||`` as an exactly rounded sum over cells."""
        return math.fsum((self.density(n) * 2.0 ** (-self.d * n)).tolist())

    def cell_masses(self, n: int) -> np.ndarray:
        return self.density(n) * 2.0 ** (-self.d * n)

    def cell_lows(self, n: int) -> np.ndarray:
        """Lower corners of the surviving level-n cells, shape (m, d)."""
        return _coords(self.index[n], n, self.d) * 2.0 ** (-n)

    def density_at(self, pts, n: int) -> np.ndarray:
        if n < 0 or n > self.depth:
            raise ValidationError(f"level {n} outside 0..{self.depth}")
        pts = np.asarray(pts, dtype=float).reshape(-1, self.d)
        inside = np.all((pts >= 0) & (pts < 1), axis=1)
        out = np.zeros(len(pts))
        if not inside.any():
            return out
        co = np.floor(pts[inside] * 2.0**n).astype(np.int64)
        co = np.clip(co, 0, (1 << n) - 1)
        key = _linear(co, n)
        idx = self.index[n]
        pos = np.minimum(np.searchsorted(idx, key), max(len(idx) - 1, 0))
        found = (idx[pos] == key) if len(idx) else np.zeros(len(key), bool)
        vals = np.where(found, self.density(n)[pos] if len(idx) else 0.0, 0.0)
        out[inside] = vals
        return out

    def evaluator(self, level: int = 0) -> "TreeEvaluator":
        return TreeEvaluator(self.model, self.d, self.alpha, self.growth_constant,
                             self.depth, unit_box(self.d), level, tree=self)

    # -- serialization ----------------------------------------------------

    def paths(self, n: int) -> list:
        """Child-digit paths (base ``2**d``) of level-n cells; the root is ``*``."""
        if n == 0:
            return ["*"]
        co = _coords(self.index[n], n, self.d)
        digits = np.zeros((len(co), n), dtype=np.int64)
        for m in range(n):
            bit = (co >> (n - 1 - m)) & 1
            digits[:, m] = sum(bit[:, j] << j for j in range(self.d))
        sym = "0123456789abcdef"
        return ["".join(sym[v] for v in row) for row in digits]

    def to_text(self) -> str:
        header = {"d": self.d, "depth": self.depth, "growth_constant": self.growth_constant,
                  "model": self.model, "seed": None if self.seed is None else self.seed.to_list()}
        lines = ["# " + json.dumps(header, sort_keys=True, separators=(",", ":"))]
        for n in range(self.depth + 1):
            for path, w in zip(self.paths(n), self.weight[n]):
                lines.append(f"{path} {float(w)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "SubdivisionTree":
        header = None
        per_level: dict = {}
        for raw in text.splitlines():
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                if header is None:
                    header = json.loads(line[1:].strip())
                continue
            path, w = line.split()
            per_level.setdefault(0 if path == "*" else len(path), []).append((path, float(w)))
        if header is None:
            raise ValidationError("tree text lacks its header line")
        d, depth = int(header["d"]), int(header["depth"])
        index, weight = [], []
        for n in range(depth + 1):
            rows = per_level.get(n, [])
            co = np.zeros((len(rows), d), dtype=np.int64)
            for r, (path, _) in enumerate(rows):
                if path == "*":
                    continue
                for ch in path:
                    v = int(ch, 16)
                    co[r] = 2 * co[r] + np.array([(v >> j) & 1 for j in range(d)])
            idx = _linear(co, n)
            w = np.array([x for _, x in rows], dtype=float)
            order = np.argsort(idx, kind="stable")
            index.append(idx[order])
            weight.append(w[order])
        seed = header.get("seed")
        return cls(d, depth, index, weight, float(header["growth_constant"]),
                   header.get("model", {}), None if seed is None else SeedPath.from_list(seed))


@dataclass
class TreeEvaluator(DensityEvaluator):
    """Density evaluator bound to a :class:`SubdivisionTree`."""

    tree: SubdivisionTree = None

    def evaluate(self, x, n=None):
        n = self._level(n)
        pts, scalar = as_points(x, self.d)
        out = self.tree.density_at(pts, n)
        return float(out[0]) if scalar else out

    def total_mass(self, n):
        return self.tree.total_mass(n)


def _check_depth(d: int, depth: int):
    if d not in (1, 2, 3):
        raise ValidationError(f"d must be 1, 2 or 3, got {d}")
    if depth < 0 or d * depth > 20:
        raise ValidationError(f"depth must satisfy depth <= 20 / d, got d={d}, depth={depth}")


def generate_cascade(d: int, weight_law: WeightLaw, depth: int, seed: SeedPath,
                     model: dict | None = None) -> SubdivisionTree:
    """I.i.d. cell weights drawn from ``weight_law`` on every surviving cell.

    The weight of the level-n cell with linear index ``i`` is the inverse-CDF
    image of ``counter_uniforms(seed, n, i)``.
    """
    _check_depth(d, depth)
    if not isinstance(weight_law, WeightLaw):
        weight_law = WeightLaw(*weight_law)
    index = [np.zeros(1, dtype=np.int64)]
    weight = [np.ones(1)]
    for n in range(depth):
        kids = _children(index[n], n, d)
        w = weight_law.sample(counter_uniforms(seed, n + 1, kids))
        keep = w > 0
        kids, w = kids[keep], w[keep]
        order = np.argsort(kids, kind="stable")
        index.append(kids[order])
        weight.append(w[order])
    info = dict(model or {"kind": "cascade", "values": list(weight_law.values),
                          "probs": list(weight_law.probs)})
    return SubdivisionTree(d, depth, index, weight, weight_law.max_value, info, seed)


def generate_percolation(d: int, p: float, depth: int, seed: SeedPath) -> SubdivisionTree:
    """Dyadic fractal percolation: each cell survives with probability ``p``."""
    law = WeightLaw.percolation(p)
    return generate_cascade(d, law, depth, seed, {"kind": "percolation", "p": float(p)})


def generate_salem_line(alpha0: float, depth: int, seed: SeedPath) -> SubdivisionTree:
    """Dyadic selection on ``[0, 1)`` with exactly ``P_n`` cells of mass ``1 / P_n``.

    When ``N_{n+1} = 1`` the kept child of the cell with index ``i`` is chosen
    by ``counter_uniforms(seed, n + 1, i)``.
    """
    spec = SalemLineSpec(alpha0, depth)
    _check_depth(1, depth)
    index = [np.zeros(1, dtype=np.int64)]
    weight = [np.ones(1)]
    for n, nj in enumerate(spec.schedule):
        par = index[n]
        if nj == 2:
            kids = np.stack([2 * par, 2 * par + 1], axis=1).reshape(-1)
        else:
            bit = (counter_uniforms(seed, n + 1, par) >= 0.5).astype(np.int64)
            kids = 2 * par + bit
        index.append(kids)
        weight.append(np.full(len(kids), 2.0 / nj))
    return SubdivisionTree(1, depth, index, weight, 2.0 if 1 in spec.schedule else 1.0,
                           {"kind": "salem-line", "alpha0": float(alpha0)}, seed)


def density_field(tree: SubdivisionTree, n: int, resolution: int) -> np.ndarray:
    """Dense raster of ``mu_n`` on ``[0, 1)**d``; axis ``j`` is coordinate ``j``."""
    if resolution < 1 or resolution & (resolution - 1):
        raise ValidationError(f"resolution must be a power of two, got {resolution}")
    if resolution < 2**n:
        raise ValidationError("resolution must be at least 2**n")
    d = tree.d
    base = np.zeros((2**n,) * d)
    co = _coords(tree.index[n], n, d)
    base[tuple(co.T)] = tree.density(n)
    rep = resolution >> n
    for ax in range(d):
        base = np.repeat(base, rep, axis=ax)
    return base


def raster_mass(raster: np.ndarray) -> float:
    """Mass of a raster on the unit cube."""
    return math.fsum(raster.ravel().tolist()) / raster.size
