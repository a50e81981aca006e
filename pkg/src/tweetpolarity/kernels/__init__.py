"""Backend selection for the hot numeric kernels.

Two implementations exist: a numba-compiled one (``numba_backend``) and a
vectorized pure-numpy one (``numpy_backend``). The environment variable
``TWEETPOLARITY_BACKEND`` picks one at import time:

  - ``auto`` (default): numba when it imports cleanly, else numpy
  - ``numba``: require numba, fail loudly if missing
  - ``numpy``: force the pure-numpy path

``benchmarks/bench_kernels.py`` times the two side by side.
"""

from __future__ import annotations

import os


def _select():
    choice = os.environ.get("TWEETPOLARITY_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"TWEETPOLARITY_BACKEND must be auto|numba|numpy, got {choice!r}")
    if choice == "numpy":
        from . import numpy_backend
        return numpy_backend
    if choice == "numba":
        from . import numba_backend
        return numba_backend
    try:
        from . import numba_backend
        return numba_backend
    except ImportError:
        from . import numpy_backend
        return numpy_backend


active = _select()

conv_pool = active.conv_pool
conv_pool_backward = active.conv_pool_backward
lstm_forward = active.lstm_forward
lstm_backward = active.lstm_backward
sgns_pair = active.sgns_pair
skipgram_epoch = active.skipgram_epoch


def backend_name() -> str:
    return active.NAME
