"""Few-shot log template extraction."""

try:
    from ._logtex import *  # noqa: F401,F403  (installed layout)
except ImportError:
    from _logtex import *  # noqa: F401,F403  (build-tree layout)
