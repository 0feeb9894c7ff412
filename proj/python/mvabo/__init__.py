from ._mvabo import *  # noqa: F401,F403
from ._mvabo import __version__  # noqa: F401
