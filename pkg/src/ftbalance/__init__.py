"""Front tracking for one-dimensional systems of balance laws, with the
wave-measure bookkeeping used to study SBV-like regularity."""
from . import algebra, characteristics, engine, errors, fracstep, measures, riemann, sbv
from .algebra import SystemSpec, eigen, nondegeneracy_order, transversality_check
from .characteristics import build_region, leftmost_characteristic, oleinik_check, region_balance_check
from .engine import Engine, EngineConfig, PiecewiseConstant, Trajectory
from .fracstep import BalanceConfig, run_balance
from .kernels import BACKEND
from .riemann import lax_curve, solve_riemann
from .sbv import cantor_proxy, counterexample_experiment, lambda_component

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BalanceConfig",
    "Engine",
    "EngineConfig",
    "PiecewiseConstant",
    "SystemSpec",
    "Trajectory",
    "algebra",
    "build_region",
    "cantor_proxy",
    "characteristics",
    "counterexample_experiment",
    "eigen",
    "engine",
    "errors",
    "fracstep",
    "lambda_component",
    "lax_curve",
    "leftmost_characteristic",
    "measures",
    "nondegeneracy_order",
    "oleinik_check",
    "region_balance_check",
    "riemann",
    "run_balance",
    "sbv",
    "solve_riemann",
    "transversality_check",
]
