"""Python bindings for the uqtraj trajectory forecasting library."""

try:
    from ._uqtraj import *  # noqa: F401,F403  (installed layout)
    from ._uqtraj import __doc__  # noqa: F401
except ImportError:  # pragma: no cover - build-tree layout used by ctest
    from _uqtraj import *  # noqa: F401,F403
    from _uqtraj import __doc__  # noqa: F401
