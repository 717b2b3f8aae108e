"""Growth-rate analysis for loop-annotated flowchart programs.

Decides, soundly and completely for the core instruction set, which
variables stay polynomially bounded in the inputs, via a fused
NFA-to-regex-style contraction over a dependency-set domain; a concrete
trace semantics validates the analyzer at desk scale.
"""

from .dep_domain import (
    D1, D1P, D2, D3,
    GrowthReport, POLY, SUPERPOLY, UNBOUNDED,
    addbdeps, analyze_lare, atomic_deps, bracket_subst, classify, compose,
    compose_sets, identity_set, lfp, loop_correct, star_abs,
)
from .converter import analyze_fc_fused, convert_fc_explicit
from .fc_model import FlowchartProgram, Instr, innermost_loop, validate_program
from .lare_model import embed_structured, wf_check
from .parsing import parse_fc, parse_lare, parse_loop
from .trace_oracle import (
    EnumCaps, equiv_traces, fc_enumerate, growth_probe, lare_enumerate, max_final,
)

__version__ = "0.1.0"
