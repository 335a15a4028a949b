"""Hot-kernel dispatch: compiled Cython core when available, NumPy fallback
otherwise.  Set QHHG_PURE_PYTHON=1 to force the fallback (used by the
benchmark and the kernel-equivalence tests).
"""

import os

from qhhg._kernels import pykernels

if os.environ.get("QHHG_PURE_PYTHON"):
    _impl = pykernels
else:
    try:
        from qhhg._kernels import _core as _impl
    except ImportError:
        _impl = pykernels

IMPLEMENTATION = _impl.IMPLEMENTATION

apply_phase = _impl.apply_phase
apply_phase_mask = _impl.apply_phase_mask
dipole_norm = _impl.dipole_norm
polyval_ascending = _impl.polyval_ascending
rk4_poly_flow = _impl.rk4_poly_flow
lagrange_interp = _impl.lagrange_interp

__all__ = [
    "IMPLEMENTATION",
    "apply_phase",
    "apply_phase_mask",
    "dipole_norm",
    "polyval_ascending",
    "rk4_poly_flow",
    "lagrange_interp",
    "pykernels",
]
