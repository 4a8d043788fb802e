"""Estimate f-divergences between Ising models from sampling and counting oracles."""

from . import analysis, divergences, estimators, exact, graphs, model, oracles
from .divergences import DivergenceKind, parse as parse_divergence
from .errors import CapacityError, InputError, ModelFormatError, OracleError
from .estimators import Estimate, EstimatorConfig, Mode, Regime, estimate
from .model import Configuration, IsingModel, ModelPair
from .oracles import Backend, OracleBundle

__version__ = "0.1.0"

__all__ = [
    "analysis",
    "divergences",
    "estimators",
    "exact",
    "graphs",
    "model",
    "oracles",
    "DivergenceKind",
    "parse_divergence",
    "CapacityError",
    "InputError",
    "ModelFormatError",
    "OracleError",
    "Estimate",
    "EstimatorConfig",
    "Mode",
    "Regime",
    "estimate",
    "Configuration",
    "IsingModel",
    "ModelPair",
    "Backend",
    "OracleBundle",
]
