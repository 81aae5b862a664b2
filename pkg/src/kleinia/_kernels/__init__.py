"""Kernel selection: compiled extension if available, numpy fallback otherwise.

Set ``KLEINIA_PURE=1`` to force the pure implementation (used by the kernel
benchmark and the equivalence tests).
"""

import os

from . import pure

if os.environ.get("KLEINIA_PURE") == "1":
    impl = pure
    COMPILED = False
else:
    try:
        from . import _speedups as impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        impl = pure
        COMPILED = False

span = impl.span
lattice_candidates = impl.lattice_candidates
normal_extension = impl.normal_extension
conj_elems = impl.conj_elems
convolve = impl.convolve
