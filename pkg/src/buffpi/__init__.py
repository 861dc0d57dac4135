"""Workbench for a pi-calculus with explicit buffers and its encodings."""

from .canon import canonicalize, check_validity, congruent
from .equivalence import naive_bisimilar, strong_bisim, weak_bisim
from .errors import BuffpiError, ParseError
from .lts import Lts, explore
from .parser import parse_config, parse_erl, parse_go, parse_pib, parse_process, parse_store
from .polyadic import encode_config, poly_lts
from .printer import show, show_config
from .semantics import reachable_lts, run_trace, step, successors
from .suites import run_suite
from .syntax import Buffer, BufferStore, Config

__all__ = [
    "Buffer", "BufferStore", "BuffpiError", "Config", "Lts", "ParseError",
    "canonicalize", "check_validity", "congruent", "encode_config", "explore",
    "naive_bisimilar", "parse_config", "parse_erl", "parse_go", "parse_pib",
    "parse_process", "parse_store", "poly_lts", "reachable_lts", "run_suite",
    "run_trace", "show", "show_config", "step", "strong_bisim", "successors",
    "weak_bisim",
]
