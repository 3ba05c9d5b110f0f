"""
Toolkit subcommands
One module per subcommand, each exposing register(subparsers)
"""

from .gen import register as register_gen
from .recover import register as register_recover
from .correct import register as register_correct
from .phase import register as register_phase
from .rip import register as register_rip
from .check import register as register_check

__all__ = [
    "register_gen",
    "register_recover",
    "register_correct",
    "register_phase",
    "register_rip",
    "register_check",
]
