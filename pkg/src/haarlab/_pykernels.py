"""numpy implementations of the hot loops; reference for the compiled module."""

import numpy as np

_SAFE = 1 << 62


def convolve_mod_1d(a, b, q):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return np.zeros(max(a.size + b.size - 1, 0), dtype=np.int64)
    if (q - 1) ** 2 * min(a.size, b.size) < _SAFE:
        return np.convolve(a, b) % q
    out = np.convolve(a.astype(object), b.astype(object)) % q
    return out.astype(np.int64)


def convolve_mod_2d(a, b, q):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), dtype=np.int64)
    for i, j in zip(*np.nonzero(a)):
        out[i:i + b.shape[0], j:j + b.shape[1]] += a[i, j] * b
        out %= q
    return out


def lca_step_1d(states, offsets, coeffs, q):
    """One automaton step on a batch of torus configurations.

    ``states`` is (S, L, J); ``coeffs[k]`` multiplies the cell at ``m + offsets[k]``.
    """
    states = np.asarray(states, dtype=np.int64)
    out = np.zeros_like(states)
    for off, f in zip(offsets, coeffs):
        shifted = np.roll(states, -int(off), axis=1)
        out += shifted @ np.asarray(f, dtype=np.int64).T
        out %= q
    return out


def transfer_forward(eta, qstack, qindex, mult):
    """Batched forward product ``sum(mult[T-1] * Q (... Q (mult[0] * eta)))``.

    ``mult`` is (B, T, n); step ``t`` applies ``qstack[qindex[t-1]]``.
    """
    mult = np.asarray(mult, dtype=np.complex128)
    v = mult[:, 0, :] * np.asarray(eta, dtype=np.complex128)[None, :]
    for t in range(1, mult.shape[1]):
        v = v @ np.asarray(qstack[qindex[t - 1]], dtype=np.complex128).T
        v *= mult[:, t, :]
    return v.sum(axis=1)
