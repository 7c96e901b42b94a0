"""Hot inner-loop kernels with a numba backend and a pure-numpy fallback.

Every kernel exists in two implementations that must agree to machine
precision. The backend is picked at import time: numba if it is importable
and the ``CWSS_NUMBA`` environment variable is not set to ``0``, numpy
otherwise. ``set_backend`` switches at runtime (used by the benchmark and
by tests that compare the two paths).

Section arrays (``starts``/``stops``) describe a contiguous partition of
``[0, n)`` into K blocks; all kernels assume complex128 input.
"""

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep, but be safe
    HAVE_NUMBA = False


def soft_threshold_numpy(v, tau):
    """Complex soft threshold: v * max(0, 1 - tau/|v|) elementwise."""
    a = np.abs(v)
    scale = np.where(a > tau, 1.0 - tau / np.maximum(a, 1e-300), 0.0)
    return v * scale


def group_soft_threshold_numpy(v, starts, stops, tau):
    """Block soft threshold per section: v_i * max(0, 1 - tau_i/||v_i||_2).

    A section with ||v_i||_2 <= tau_i maps to exactly zero.
    """
    e = v.real**2 + v.imag**2
    norms = np.sqrt(np.add.reduceat(e, starts))
    scale = np.where(norms > tau, 1.0 - tau / np.maximum(norms, 1e-300), 0.0)
    return v * np.repeat(scale, stops - starts)


def section_norms_numpy(v, starts, stops):
    """Per-section l2 norms of a complex vector."""
    e = v.real**2 + v.imag**2
    return np.sqrt(np.add.reduceat(e, starts))


def section_l1_numpy(v, starts, stops):
    """Per-section l1 mass (sum of magnitudes) of a complex vector."""
    return np.add.reduceat(np.abs(v), starts)


if HAVE_NUMBA:

    @njit(cache=True)
    def soft_threshold_numba(v, tau):
        out = np.zeros_like(v)
        for j in range(v.shape[0]):
            a = abs(v[j])
            if a > tau:
                out[j] = v[j] * (1.0 - tau / a)
        return out

    @njit(cache=True)
    def group_soft_threshold_numba(v, starts, stops, tau):
        out = np.zeros_like(v)
        for i in range(starts.shape[0]):
            s = 0.0
            for j in range(starts[i], stops[i]):
                s += v[j].real ** 2 + v[j].imag ** 2
            nrm = np.sqrt(s)
            if nrm > tau[i]:
                g = 1.0 - tau[i] / nrm
                for j in range(starts[i], stops[i]):
                    out[j] = v[j] * g
        return out

    @njit(cache=True)
    def section_norms_numba(v, starts, stops):
        out = np.empty(starts.shape[0])
        for i in range(starts.shape[0]):
            s = 0.0
            for j in range(starts[i], stops[i]):
                s += v[j].real ** 2 + v[j].imag ** 2
            out[i] = np.sqrt(s)
        return out

    @njit(cache=True)
    def section_l1_numba(v, starts, stops):
        out = np.empty(starts.shape[0])
        for i in range(starts.shape[0]):
            s = 0.0
            for j in range(starts[i], stops[i]):
                s += abs(v[j])
            out[i] = s
        return out


_IMPLS = {
    "numpy": {
        "soft_threshold": soft_threshold_numpy,
        "group_soft_threshold": group_soft_threshold_numpy,
        "section_norms": section_norms_numpy,
        "section_l1": section_l1_numpy,
    }
}
if HAVE_NUMBA:
    _IMPLS["numba"] = {
        "soft_threshold": soft_threshold_numba,
        "group_soft_threshold": group_soft_threshold_numba,
        "section_norms": section_norms_numba,
        "section_l1": section_l1_numba,
    }


def _default_backend():
    if HAVE_NUMBA and os.environ.get("CWSS_NUMBA", "1") != "0":
        return "numba"
    return "numpy"


_backend = _default_backend()


def set_backend(name):
    """Select the kernel backend ('numba' or 'numpy') at runtime."""
    global _backend
    if name not in _IMPLS:
        raise ValueError(
            f"unknown backend {name!r}; available: {sorted(_IMPLS)}"
        )
    _backend = name


def get_backend():
    return _backend


def soft_threshold(v, tau):
    return _IMPLS[_backend]["soft_threshold"](v, tau)


def group_soft_threshold(v, starts, stops, tau):
    return _IMPLS[_backend]["group_soft_threshold"](v, starts, stops, tau)


def section_norms(v, starts, stops):
    return _IMPLS[_backend]["section_norms"](v, starts, stops)


def section_l1(v, starts, stops):
    return _IMPLS[_backend]["section_l1"](v, starts, stops)
