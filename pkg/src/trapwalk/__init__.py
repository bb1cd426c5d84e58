"""Exact and Monte Carlo analysis of a random walk among soft traps on the half line."""
from __future__ import annotations

import sys

# interval lengths of recursive landscapes routinely exceed the default
# int <-> str conversion limit; the package enforces its own digit budget
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

__version__ = "0.1.0"
