"""Kernel dispatch: the compiled extension when available, numpy otherwise.

Set ``WEAKKAM_PURE=1`` to force the numpy fallback.
"""

import os

from . import _pykernels

_impl = _pykernels
if os.environ.get("WEAKKAM_PURE", "") != "1":
    try:
        from . import _ckernels as _impl
    except ImportError:  # extension not built
        pass

BACKEND = _impl.BACKEND
RELAX_EPS = _impl.RELAX_EPS
apply_operator = _impl.apply_operator
bellman_step = _impl.bellman_step
discounted_fixed_point = _impl.discounted_fixed_point
karp_min_mean = _impl.karp_min_mean
all_pairs_shortest = _impl.all_pairs_shortest
trajectory_weights = _impl.trajectory_weights
