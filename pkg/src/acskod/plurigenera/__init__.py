"""Plurigenera of almost complex structures: section equation and strategies."""

from .equation import SectionEquation, build_section_equation
from .fourier import FourierError, FourierSystem, fourier_reduce
from .forcing import ForcingResult, algebraic_forcing, verify_tree
from .maxprinciple import MaxPrincipleResult, strategy_max_principle
from .oracle import OracleError, OracleResult, oracle_numeric_kernel
from .pipeline import (InternalInvariantError, PlurigenusReport, certificate_document, compute_plurigenus,
                       verify_certificate)
from .resonance import CaseResonance, Section, resonance, verify_section

__all__ = [
    "SectionEquation", "build_section_equation", "FourierError", "FourierSystem", "fourier_reduce",
    "ForcingResult", "algebraic_forcing", "verify_tree", "MaxPrincipleResult", "strategy_max_principle",
    "OracleError", "OracleResult", "oracle_numeric_kernel", "InternalInvariantError", "PlurigenusReport",
    "certificate_document", "compute_plurigenus", "verify_certificate", "CaseResonance", "Section",
    "resonance", "verify_section",
]
