"""Library modules for numconj."""

from .apery import AperyRow, BrunReport, DeltaRow, RunReport, Sign
from .bhargava import AxiomReport, TruncationPolicy, TruncationUnstableError
from .conjectures import CheckResult, CheckStatus, ConjectureId, ScanReport
from .exactmath import FactoredNat, NumconjError
from .primes import ConstellationKind, ConstellationSet, PrimeTable
from .report_generator import ReportEnvelope, ReportGenerator

__all__ = [
    "AperyRow",
    "AxiomReport",
    "BrunReport",
    "CheckResult",
    "CheckStatus",
    "ConjectureId",
    "ConstellationKind",
    "ConstellationSet",
    "DeltaRow",
    "FactoredNat",
    "NumconjError",
    "PrimeTable",
    "ReportEnvelope",
    "ReportGenerator",
    "RunReport",
    "ScanReport",
    "Sign",
    "TruncationPolicy",
    "TruncationUnstableError",
]
