"""The DG sensing frame, Walsh-Hadamard transforms and chirp reconstruction."""

from .chirp import EvidenceVector, accumulate_evidence, detect_at, reconstruct, regress
from .frame import FrameSpec, SparseSignal, analyze, column, synthesize
from .wht import fwht, naive_wht

__all__ = [
    "FrameSpec",
    "SparseSignal",
    "column",
    "synthesize",
    "analyze",
    "fwht",
    "naive_wht",
    "EvidenceVector",
    "accumulate_evidence",
    "detect_at",
    "reconstruct",
    "regress",
]
