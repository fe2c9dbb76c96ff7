"""Seeded generators for the simulated imbalanced-data experiments.

* donut: majority uniform on a square with a central disk removed, minority
  an isotropic Gaussian at the center.
* cube: the 3-D analogue on ``[0, 15]^3`` with a ball removed.
* separable: two classes split by the anti-diagonal of the unit square,
  each allowed to spill ``overlap_margin`` across it.
"""

import math
from dataclasses import dataclass

import numpy as np

from ._rng import derive_rng
from .dataset import Dataset
from .exceptions import ArgumentError, GeneratorError

__all__ = [
    "DonutSpec",
    "CubeSpec",
    "SeparableSpec",
    "gen_donut",
    "gen_cube",
    "gen_separable",
    "generate",
    "GENERATORS",
]

# rejection sampling gives up below this acceptance rate
_MIN_ACCEPTANCE = 0.01


@dataclass(frozen=True)
class DonutSpec:
    n_total: int = 1000
    minority_fraction: float = 0.2
    side: float = 15.0
    hole_radius: float = 2.0
    minority_sigma: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.minority_fraction < 0.5:
            raise ArgumentError("minority_fraction must lie in (0, 0.5)")
        if self.side <= 0 or self.hole_radius < 0 or self.minority_sigma <= 0:
            raise ArgumentError("side and minority_sigma must be > 0, hole_radius >= 0")
        if not self.hole_radius < self.side / 2:
            raise ArgumentError("hole_radius must be smaller than side / 2")

    @property
    def counts(self):
        n_min = int(math.floor(self.n_total * self.minority_fraction + 0.5))
        return self.n_total - n_min, n_min


@dataclass(frozen=True)
class CubeSpec:
    n_majority: int = 500
    n_minority: int = 100
    side: float = 15.0
    void_radius: float = 1.5
    mu: tuple = (7.0, 7.0, 7.0)
    sigma: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma <= 0:
            raise ArgumentError("sigma must be > 0")
        if not 0 <= self.void_radius < self.side / 2:
            raise ArgumentError("void_radius must lie in [0, side / 2)")


@dataclass(frozen=True)
class SeparableSpec:
    n_majority: int = 500
    n_minority: int = 100
    overlap_margin: float = 0.21
    seed: int = 0

    def __post_init__(self):
        if self.overlap_margin < 0:
            raise ArgumentError("overlap_margin must be >= 0")


def _rejection_uniform(rng, n, low, high, keep, name):
    """``n`` points uniform on the box ``[low, high]^d`` restricted to ``keep``."""
    low, high = np.asarray(low, dtype=float), np.asarray(high, dtype=float)
    out = np.empty((0, low.size))
    drawn = accepted = 0
    while out.shape[0] < n:
        batch = max(64, 2 * (n - out.shape[0]))
        cand = rng.uniform(low, high, size=(batch, low.size))
        ok = keep(cand)
        drawn += batch
        accepted += int(ok.sum())
        if drawn >= 10_000 and accepted < _MIN_ACCEPTANCE * drawn:
            raise GeneratorError(
                f"{name}: rejection sampling acceptance {accepted / drawn:.4f} below "
                f"{_MIN_ACCEPTANCE}; excluded region too large")
        out = np.vstack([out, cand[ok]])
    return out[:n]


def _assemble(majority, minority, names):
    X = np.vstack([majority, minority])
    y = np.r_[np.zeros(len(majority), dtype=np.int64), np.ones(len(minority), dtype=np.int64)]
    return Dataset(X, y, feature_names=names)


def gen_donut(spec=DonutSpec()):
    n_maj, n_min = spec.counts
    if n_maj < 1 or n_min < 1:
        raise ArgumentError(f"donut spec yields empty class ({n_maj}, {n_min})")
    rng = derive_rng(spec.seed, "donut")
    c = np.full(2, spec.side / 2)
    maj = _rejection_uniform(
        rng, n_maj, np.zeros(2), np.full(2, spec.side),
        lambda P: np.linalg.norm(P - c, axis=1) >= spec.hole_radius, "donut")
    mino = c + spec.minority_sigma * rng.standard_normal((n_min, 2))
    return _assemble(maj, mino, ("x0", "x1"))


def gen_cube(spec=CubeSpec()):
    rng = derive_rng(spec.seed, "cube")
    c = np.full(3, spec.side / 2)
    maj = _rejection_uniform(
        rng, spec.n_majority, np.zeros(3), np.full(3, spec.side),
        lambda P: np.linalg.norm(P - c, axis=1) >= spec.void_radius, "cube")
    mino = np.asarray(spec.mu, dtype=float) + spec.sigma * rng.standard_normal((spec.n_minority, 3))
    return _assemble(maj, mino, ("x0", "x1", "x2"))


def gen_separable(spec=SeparableSpec()):
    """Majority below the line ``x + y = 1`` (plus margin), minority above it (minus margin).

    The margin is measured perpendicular to the line.
    """
    rng = derive_rng(spec.seed, "separable")
    m = spec.overlap_margin
    signed = lambda P: (P[:, 0] + P[:, 1] - 1.0) / math.sqrt(2.0)
    maj = _rejection_uniform(rng, spec.n_majority, np.zeros(2), np.ones(2),
                             lambda P: signed(P) <= m, "separable")
    mino = _rejection_uniform(rng, spec.n_minority, np.zeros(2), np.ones(2),
                              lambda P: signed(P) >= -m, "separable")
    return _assemble(maj, mino, ("x0", "x1"))


GENERATORS = {"donut": (DonutSpec, gen_donut), "cube": (CubeSpec, gen_cube),
              "separable": (SeparableSpec, gen_separable)}


def generate(name, **params):
    """Build the named generator's spec from ``params`` and run it."""
    try:
        spec_cls, fn = GENERATORS[name]
    except KeyError:
        raise ArgumentError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") \
            from None
    return fn(spec_cls(**params))
