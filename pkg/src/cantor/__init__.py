"""Exact mixed-radix arithmetic, jump sets, weighted submeasures and the
separation witnesses built from them."""

import sys

# Exact certificates print integers with tens of thousands of digits.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

from .base_seq import BaseProfile, BaseSeq, base_profile, build_base, in_subring, q_a_membership
from .metric import (
    PreconditionError,
    RhoValue,
    TruncationResult,
    UndecidedError,
    h_membership,
    rho,
    rho_triangle_modulus,
    triangle_modulus,
    truncation_convergence,
)
from .mixed_radix import (
    DigitSpec,
    JumpInfo,
    MRReal,
    SignedMRReal,
    absdiff,
    digits,
    div_by_prime_digits,
    from_digit_spec,
    jump_algebra_bound,
    jump_of,
    parse_number,
    signed,
    to_digit_spec,
    truncate,
)
from .natset import IndexSet, NatSet, Term, block_index
from .separation import SeparationCertificate, flatten, separation_certificate, spike_witness
from .submeasure import (
    InclusionResult,
    IntervalCertificate,
    PhiX,
    Submeasure,
    TailCertificate,
    Verdict,
    exh_membership,
    ideal_inclusion,
    interval_P,
    is_adapted,
    make_phi_x,
    phi_eval,
    shift_modulus,
    tall_threshold,
    union_modulus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
