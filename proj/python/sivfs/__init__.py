"""Fine structure, optical selection rules and ODMR models of spin-3/2
silicon-vacancy centers in 6H-SiC."""

from sivfs._core import *  # noqa: F401,F403
from sivfs._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
