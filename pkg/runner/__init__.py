# runner package
from runner.config import config

__all__ = ["config"]
