"""Matching with diversity populations: choice functions, DA, audits, oracles."""
from ._backend import BACKEND
from .choice import ChoiceKind, choose
from .engine import Pareto, PipelineConfig, run_boston, run_da, run_pipeline
from .model import Candidate, Market, Matching, PreferenceReport, RawPopulation, validate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Candidate",
    "ChoiceKind",
    "Market",
    "Matching",
    "Pareto",
    "PipelineConfig",
    "PreferenceReport",
    "RawPopulation",
    "choose",
    "run_boston",
    "run_da",
    "run_pipeline",
    "validate",
]
