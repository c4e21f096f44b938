"""Coherence of two-level ensembles whose detunings are redrawn at random times.

Engines: closed forms for stable laws (``analytic``), the exact
Poisson-reset transform relation with spectra and inversion (``poisson``),
and an ensemble simulator (``montecarlo``).  ``analysis`` extracts widths,
decay rates and crossovers; ``cli`` drives reproducible sweeps.
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    CoherenceCurve,
    CollisionSchedule,
    Regime,
    classify_regime,
    coherence_free,
    coherence_stable_with_collisions,
    zeno_product,
)
from .distributions import StableLaw, StudentT, TruncatedDistribution  # noqa: E402
from .montecarlo import CollisionProcess, SimulationConfig, simulate  # noqa: E402
from .poisson import LaplaceEvaluator, invert_laplace, laplace_R, laplace_R0, spectrum  # noqa: E402

__all__ = [
    "__version__",
    "StableLaw", "StudentT", "TruncatedDistribution",
    "CoherenceCurve", "CollisionSchedule", "Regime", "classify_regime",
    "coherence_free", "coherence_stable_with_collisions", "zeno_product",
    "CollisionProcess", "SimulationConfig", "simulate",
    "LaplaceEvaluator", "laplace_R0", "laplace_R", "spectrum", "invert_laplace",
]
