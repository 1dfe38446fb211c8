"""Tree-parallel MCTS for small-board Go."""

from ._parago import *  # noqa: F401,F403
from ._parago import __version__  # noqa: F401
