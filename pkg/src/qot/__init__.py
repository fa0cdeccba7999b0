"""Oblivious transfer from BB84 states, simulated end to end.

Modules: ``channel`` (BB84 source and noisy channel), ``primitives`` (PRG,
Toeplitz hashing, Naor commitments), ``ecc`` (syndrome codes), ``commit``
(equivocal and extractable commitments), ``ot`` (the OT protocol),
``secparams`` (security bounds and parameter search), ``transport`` and
``cli``.
"""

from .ot import OtSessionResult, run_multi_ot, run_ot
from .secparams import SecurityParams, optimize_params

__all__ = ["OtSessionResult", "SecurityParams", "optimize_params", "run_multi_ot", "run_ot"]
__version__ = "0.1.0"
