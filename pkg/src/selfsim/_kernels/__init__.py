"""Kernel backend selection.

The compiled extension (`_fast`, Cython) and the pure-Python fallback
(`_pure`) implement the same stepping algorithm; whichever is available is
picked at import time. Set SELFSIM_PURE=1 to force the fallback (used by the
backend benchmark and for environments without a C toolchain).
"""

import os

from . import codes  # noqa: F401

if os.environ.get("SELFSIM_PURE", "") not in ("", "0"):
    from . import _pure as impl

    BACKEND = "pure"
else:
    try:
        from . import _fast as impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _pure as impl

        BACKEND = "pure"

integrate_profile = impl.integrate_profile
integrate_phase = impl.integrate_phase
integrate_linear = impl.integrate_linear
flow_velocity = impl.flow_velocity
