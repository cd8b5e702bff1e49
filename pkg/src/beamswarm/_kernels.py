"""Hot loops for the unit-chain beam integration.

Two interchangeable backends compute the same recurrence:

* a numba ``@njit`` kernel (default when numba imports), and
* a pure-numpy path that vectorises over guesses and loops over units.

Set ``BEAMSWARM_DISABLE_NUMBA=1`` before import to force the numpy path.
Results agree between backends to floating round-off, not bit-for-bit
(libm ``sin``/``cos`` differ); each backend is deterministic on its own.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLE = os.environ.get("BEAMSWARM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLE:
        raise ImportError("numba disabled by BEAMSWARM_DISABLE_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

BACKEND = "numba" if HAS_NUMBA else "numpy"


def _chain_numpy(flex, fsin, fcos, m0, dl, guesses, path):
    # guesses: (n, 3) of (Qx, Qy, theta0); returns (n, 3) computed tips.
    n = guesses.shape[0]
    qx = guesses[:, 0]
    qy = guesses[:, 1]
    x = np.zeros(n)
    y = np.zeros(n)
    th = np.zeros(n)
    record = path.shape[0] > 0
    for i in range(flex.shape[0]):
        moment = fsin * (qx - x) - fcos * (qy - y) + m0
        x = x + dl * np.cos(th)
        y = y + dl * np.sin(th)
        th = th + moment * flex[i]
        if record:
            path[:, i + 1, 0] = x
            path[:, i + 1, 1] = y
            path[:, i + 1, 2] = th
    return np.stack((x, y, th), axis=1)


if HAS_NUMBA:

    @njit(cache=True, nogil=True, fastmath=False)
    def _chain_one(flex, fsin, fcos, m0, dl, qx, qy, out, path, k):
        x = 0.0
        y = 0.0
        th = 0.0
        record = path.shape[0] > 0
        for i in range(flex.shape[0]):
            moment = fsin * (qx - x) - fcos * (qy - y) + m0
            x = x + dl * np.cos(th)
            y = y + dl * np.sin(th)
            th = th + moment * flex[i]
            if record:
                path[k, i + 1, 0] = x
                path[k, i + 1, 1] = y
                path[k, i + 1, 2] = th
        out[0] = x
        out[1] = y
        out[2] = th

    @njit(cache=True, nogil=True, fastmath=False)
    def _chain_numba(flex, fsin, fcos, m0, dl, guesses, path):
        n = guesses.shape[0]
        tips = np.empty((n, 3))
        for k in range(n):
            _chain_one(flex, fsin, fcos, m0, dl, guesses[k, 0], guesses[k, 1], tips[k], path, k)
        return tips

    _chain = _chain_numba
else:
    _chain = _chain_numpy


def integrate_chain(flex, force, phi, moment, dl, guesses, keep_path=False, backend=None):
    """Integrate the unit chain for a batch of hypothesised tip states.

    ``flex[i]`` is ``dl / (E * I_i)``. Returns ``(tips, path)`` where
    ``tips`` is ``(n, 3)`` and ``path`` is ``(n, nl + 1, 3)`` when
    ``keep_path`` is set, else an empty array. ``backend`` may force
    ``"numpy"``; the default is whichever backend was selected at import.
    """
    flex = np.ascontiguousarray(flex, dtype=np.float64)
    guesses = np.ascontiguousarray(np.atleast_2d(guesses), dtype=np.float64)
    fsin = float(force) * np.sin(float(phi))
    fcos = float(force) * np.cos(float(phi))
    if keep_path:
        path = np.zeros((guesses.shape[0], flex.shape[0] + 1, 3))
    else:
        path = np.zeros((0, 0, 3))
    chain = _chain_numpy if backend == "numpy" else _chain
    tips = chain(flex, fsin, fcos, float(moment), float(dl), guesses, path)
    return tips, path
