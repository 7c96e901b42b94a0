"""Sub-Nyquist acquisition as random sample selection on the Nyquist grid.

The measurement operator is the partial inverse-DFT map r -> (F^-1 r)
restricted to M randomly chosen grid positions. Because the DFT is unitary
and the rows are distinct, the operator A satisfies A A^H = I, which the
solvers exploit for closed-form projections. Both the operator and its
adjoint are matrix-free (one FFT each); an explicit dense matrix exists
only as a small-scale test oracle.
"""

from dataclasses import dataclass

import numpy as np

from .signal_model import unitary_dft, unitary_idft

DENSE_MAX_N = 64


@dataclass(frozen=True)
class SamplingPattern:
    """M strictly increasing sample indices out of an N-point grid."""

    n: int
    indices: np.ndarray
    seed: object = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        idx.flags.writeable = False
        if not 1 <= len(idx) < self.n + 1:
            raise ValueError(f"need 1 <= M <= N, got M={len(idx)}, N={self.n}")
        if np.any(idx < 0) or np.any(idx >= self.n):
            raise ValueError(f"indices out of range [0, {self.n})")
        if np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")

    @property
    def m(self):
        return len(self.indices)


def draw_pattern(n, ratio, seed):
    """Draw M = round(ratio*n) distinct indices uniformly without replacement."""
    if not 0.0 < ratio <= 1.0:
        raise ValueError(f"ratio must be in (0, 1], got {ratio}")
    m = int(round(ratio * n))
    if m < 1:
        raise ValueError(f"ratio {ratio} selects no samples at n={n}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=m, replace=False))
    return SamplingPattern(n=n, indices=idx, seed=seed)


def acquire(truth, pattern):
    """Measure the noisy signal at the pattern's grid positions."""
    if pattern.n != len(truth):
        raise ValueError(f"pattern is for N={pattern.n}, signal has N={len(truth)}")
    return truth.noisy_signal[pattern.indices]


def forward(r, pattern):
    """Apply the measurement operator: inverse unitary DFT, then row selection."""
    if pattern.n != len(r):
        raise ValueError(f"pattern is for N={pattern.n}, vector has N={len(r)}")
    return unitary_idft(r)[pattern.indices]


def adjoint(y, pattern):
    """Apply the conjugate-transpose operator: scatter, then forward unitary DFT."""
    if pattern.m != len(y):
        raise ValueError(f"pattern selects M={pattern.m}, vector has M={len(y)}")
    v = np.zeros(pattern.n, dtype=np.complex128)
    v[pattern.indices] = y
    return unitary_dft(v)


def dense_matrix(pattern):
    """Explicit M x N operator matrix; small-scale test oracle only."""
    if pattern.n > DENSE_MAX_N:
        raise ValueError(
            f"dense matrix limited to N <= {DENSE_MAX_N}, got N={pattern.n}"
        )
    n = pattern.n
    k = np.arange(n)
    rows = np.exp(2j * np.pi * np.outer(pattern.indices, k) / n) / np.sqrt(n)
    return rows
