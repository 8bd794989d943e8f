"""Noise-frequency continuation posterior sampling for linear inverse problems.

The package pairs analytic score priors (Gaussian / Gaussian mixture) with
linear degradation operators, a band-limited measurement guidance term whose
passband widens as the diffusion noise level drops, Langevin refinement of
intermediate posteriors, and Haar-domain fusion of coarse and detail content.
Every analytic guarantee behind the sampler ships with an executable
verification (see nfc.theorems)."""

from .grid import SeededRng
from .operators import LinearOperator, Measurement, degrade, make_standard_operator
from .prior import ScoreModel, SolverConfig, pf_ode_denoise, tweedie_x0
from .sampler import DivergenceError, run
from .schedules import ScheduleConfig
from .spectral import GuidanceWeights, RadialMask, dft2, idft2
from .theorems import verify_all

__version__ = "0.1.0"

__all__ = [
    "SeededRng",
    "LinearOperator",
    "Measurement",
    "degrade",
    "make_standard_operator",
    "ScoreModel",
    "SolverConfig",
    "pf_ode_denoise",
    "tweedie_x0",
    "DivergenceError",
    "run",
    "ScheduleConfig",
    "GuidanceWeights",
    "RadialMask",
    "dft2",
    "idft2",
    "verify_all",
    "__version__",
]
