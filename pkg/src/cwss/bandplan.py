"""Fixed spectrum-allocation plan: K contiguous, variable-length bin sections."""

from dataclasses import dataclass, field

import numpy as np


def hz_to_bin(freq_hz, n_bins, span_hz):
    """Map a frequency to its nearest grid-bin index (uniform grid over [0, span))."""
    return int(round(freq_hz * n_bins / span_hz))


@dataclass(frozen=True)
class BandPlan:
    """Partition of the N frequency bins into K half-open sections.

    ``boundaries`` are the K-1 interior split indices d_1 < ... < d_{K-1};
    the sections are [0, d_1), [d_1, d_2), ..., [d_{K-1}, n).
    """

    n: int
    boundaries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "boundaries", tuple(int(b) for b in self.boundaries))
        if self.n < 1:
            raise ValueError(f"plan needs n >= 1, got {self.n}")
        prev = 0
        for d in self.boundaries:
            if not prev < d < self.n:
                raise ValueError(
                    f"boundaries must be strictly increasing inside (0, {self.n}); got {self.boundaries}"
                )
            prev = d

    @classmethod
    def from_hz(cls, boundaries_hz, n_bins, span_hz):
        """Build a plan from interior boundary frequencies in Hz."""
        bins = [hz_to_bin(f, n_bins, span_hz) for f in boundaries_hz]
        return cls(n=n_bins, boundaries=tuple(bins))

    @classmethod
    def uniform(cls, n, k):
        """K sections of (as near as possible) equal length."""
        if not 1 <= k <= n:
            raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
        edges = [round(i * n / k) for i in range(1, k)]
        return cls(n=n, boundaries=tuple(edges))

    @property
    def k(self):
        return len(self.boundaries) + 1

    @property
    def starts(self):
        return np.asarray((0,) + self.boundaries, dtype=np.int64)

    @property
    def stops(self):
        return np.asarray(self.boundaries + (self.n,), dtype=np.int64)

    def sections(self):
        """List of (start, stop) index pairs."""
        return list(zip(self.starts.tolist(), self.stops.tolist()))
