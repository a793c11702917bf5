"""Kernel dispatch: the compiled extension when importable, else pure Python.

Set ``FTBALANCE_PURE=1`` to force the fallback.
"""
from __future__ import annotations

import os

BACKEND = "python"

if os.environ.get("FTBALANCE_PURE", "") not in ("1", "true", "yes"):
    try:
        from ._kernels import (  # type: ignore[attr-defined]
            approaching_quadratic,
            linear_term,
            pair_integral,
            pair_sum,
            pareto_knapsack,
            quadratic_full,
        )

        BACKEND = "cython"
    except ImportError:
        pass

if BACKEND == "python":
    from ._kernels_py import (  # noqa: F811
        approaching_quadratic,
        linear_term,
        pair_integral,
        pair_sum,
        pareto_knapsack,
        quadratic_full,
    )

__all__ = [
    "BACKEND",
    "approaching_quadratic",
    "linear_term",
    "pair_integral",
    "pair_sum",
    "pareto_knapsack",
    "quadratic_full",
]
