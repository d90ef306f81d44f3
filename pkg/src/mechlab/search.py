"""Deviation-bid grids and seeded profile sampling.

Checkers and attack searches probe deviations on a finite grid.  The grid
is always augmented with the bid 0, the grid's upper end, and every bid
already in the profile under test, since best responses in auctions sit
at or just around rival bids.  Profile sampling draws bids from the same
grid so utilities stay exactly representable and runs are reproducible
from the seed alone.
"""

import random
from dataclasses import dataclass

from .core import BidProfile

_DEDUP_EPS = 1e-12


@dataclass(frozen=True)
class SearchGrid:
    """Uniform bid grid lo, lo+step, ..., hi (hi always included)."""

    lo: float = 0.0
    hi: float = 10.0
    step: float = 0.5

    def __post_init__(self):
        if not (self.step > 0):
            raise ValueError(f"grid step must be > 0, got {self.step!r}")
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError(f"grid needs 0 <= lo <= hi, got [{self.lo!r}, {self.hi!r}]")

    def base_points(self) -> list:
        points = []
        k = 0
        while True:
            z = self.lo + k * self.step
            if z > self.hi + _DEDUP_EPS:
                break
            points.append(min(z, self.hi))
            k += 1
        if not points or points[-1] < self.hi - _DEDUP_EPS:
            points.append(self.hi)
        return points

    def points(self, extra=()) -> list:
        """Base grid plus 0, hi, and any extra bids, deduplicated and sorted."""
        merged = sorted(self.base_points() + [0.0, self.hi] + [float(b) for b in extra])
        out = [merged[0]]
        for z in merged[1:]:
            if z - out[-1] > _DEDUP_EPS:
                out.append(z)
        return out

    def describe(self) -> str:
        return f"{self.lo:g}:{self.hi:g}:{self.step:g} plus 0, hi, and profile bids"

    def to_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "step": self.step}


@dataclass(frozen=True)
class ProfileSampler:
    """Seeded sampler of bid profiles with grid-valued bids.

    Population sizes are uniform on [n_min, n_max]; agent ids are 1..n.
    Identical (seed, grid, range) inputs yield the identical profile list.
    """

    grid: SearchGrid
    n_min: int = 2
    n_max: int = 5
    seed: int = 42

    def __post_init__(self):
        if not (1 <= self.n_min <= self.n_max):
            raise ValueError(f"need 1 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]")

    def sample(self, budget: int) -> list:
        rng = random.Random(self.seed)
        values = self.grid.base_points()
        profiles = []
        for _ in range(budget):
            n = rng.randint(self.n_min, self.n_max)
            profiles.append(BidProfile.from_bids([rng.choice(values) for _ in range(n)]))
        return profiles

    def describe(self) -> str:
        return (f"{self.n_min} <= n <= {self.n_max}, bids on grid "
                f"[{self.grid.lo:g}:{self.grid.hi:g}:{self.grid.step:g}], seed {self.seed}")
