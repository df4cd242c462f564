"""Certificates for omega-regular properties of MDPs viewed as distribution transformers.

The pipeline builds a product of the MDP dynamics with a Büchi automaton over
affine atoms, instantiates affine ranking and invariant templates, eliminates
the distribution quantifier with Farkas or Handelman multipliers and hands the
resulting system to an external SMT solver. Solver models are checked again
by an independent validator before being reported.
"""

from .automata import parse_hoa, parse_spec
from .mdp import Mdp, parse_mdp, parse_strategy
from .pipeline import Config, Result, run
from .region import parse_init, parse_init_arg
from .validate import check_certificate, simulate_monitor

__version__ = "0.1.0"

__all__ = [
    "Config",
    "Mdp",
    "Result",
    "check_certificate",
    "parse_hoa",
    "parse_init",
    "parse_init_arg",
    "parse_mdp",
    "parse_spec",
    "parse_strategy",
    "run",
    "simulate_monitor",
]
