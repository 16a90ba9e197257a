"""Binary hyperdimensional-computing classifier toolkit."""

try:
    # Installed layout: the extension lives inside this package.
    from hdckit._core import *  # noqa: F401,F403
    from hdckit._core import __version__  # noqa: F401
except ImportError:
    # Build-tree layout: the extension sits on PYTHONPATH next to this package.
    from _core import *  # noqa: F401,F403
    from _core import __version__  # noqa: F401
