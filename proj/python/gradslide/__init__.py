"""Composite convex optimization via parameter-free gradient sliding.

Thin wrapper over the C++ extension module. When running against a plain
CMake build (not an installed wheel), point GRADSLIDE_MODULE_DIR at the
directory containing the compiled ``_gradslide`` module.
"""

import os
import sys

_module_dir = os.environ.get("GRADSLIDE_MODULE_DIR")
if _module_dir and _module_dir not in sys.path:
    sys.path.insert(0, _module_dir)

try:
    from _gradslide import *  # noqa: F401,F403
    from _gradslide import __doc__ as _core_doc  # noqa: F401
except ImportError:  # installed layout: extension lives inside the package
    from gradslide._gradslide import *  # noqa: F401,F403
