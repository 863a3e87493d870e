"""Statistics of geodesic (minimum-hop) path counts in 1D Poisson networks."""

__version__ = "0.1.0"

from .analytics import (
    mean_sigma,
    mecke_central_moment,
    mecke_moment,
    rebroadcast_probability,
    recursion_moments,
)
from .geodesics import count_bfs, count_lens_chains
from .model import Scenario, lens_decomposition
from .montecarlo import EnsembleConfig, run_ensemble

__all__ = [
    "Scenario",
    "lens_decomposition",
    "count_bfs",
    "count_lens_chains",
    "mean_sigma",
    "mecke_moment",
    "mecke_central_moment",
    "recursion_moments",
    "rebroadcast_probability",
    "EnsembleConfig",
    "run_ensemble",
]
