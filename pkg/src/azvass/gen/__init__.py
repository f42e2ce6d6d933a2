"""Instance generators: LBA membership, Post correspondence and Diophantine polynomials."""

from .lba import Lba, LbaError, LbaLayout, Move, Outcome, gen_lba, simulate_lba, tape_invariant
from .pcp import PcpError, PcpInstance, bit_gadget, gen_pcp, solve_pcp_bounded
from .poly import (CounterProgram, Polynomial, PolyError, PolyParseError, ProgramError,
                   compile_poly, lower_ir, non_identity_matrices, parse_polynomial,
                   run_ir_bounded, zero_test_audit)

__all__ = [
    "Lba", "LbaError", "LbaLayout", "Move", "Outcome", "gen_lba", "simulate_lba", "tape_invariant",
    "PcpError", "PcpInstance", "bit_gadget", "gen_pcp", "solve_pcp_bounded",
    "CounterProgram", "Polynomial", "PolyError", "PolyParseError", "ProgramError",
    "compile_poly", "lower_ir", "non_identity_matrices", "parse_polynomial",
    "run_ir_bounded", "zero_test_audit",
]
