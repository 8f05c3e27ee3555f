"""
Nelder-Mead simplex minimizer.

Derivative-free descent with reflection, expansion, contraction and shrink
steps. Stops once every vertex lies within `tol` of the best one, or after
`max_iter` iterations.
"""

import logging
import math
from typing import Callable, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)

ALPHA = 1.0   # reflection
GAMMA = 2.0   # expansion
BETA = 0.5    # contraction
DELTA = 0.5   # shrink


class OptimizerError(Exception):
    """Raised when the objective returns a non-finite value."""
    pass


def nelder_mead(objective: Callable[[np.ndarray], float], start: Sequence[float],
                tol: float = 1e-9, max_iter: int = 4000,
                step: float = 0.1) -> Tuple[np.ndarray, float]:
    """
    Minimize a real function on R^n.

    Args:
        objective: Function of a 1-D array returning a float
        start: Initial point
        tol: Simplex diameter at which to stop
        max_iter: Iteration cap
        step: Edge length of the initial simplex

    Returns:
        Tuple of (argmin, value)

    Raises:
        OptimizerError: If the objective is not finite at some evaluated point
    """
    def evaluate(x: np.ndarray) -> float:
        value = float(objective(x))
        if not math.isfinite(value):
            raise OptimizerError(f"objective is not finite at {x.tolist()}")
        return value

    x0 = np.asarray(start, dtype=float).reshape(-1)
    dim = x0.size
    simplex = np.vstack([x0] + [x0 + step * np.eye(dim)[i] for i in range(dim)])
    values = np.array([evaluate(x) for x in simplex])

    iterations = 0
    while True:
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]

        diameter = np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)) if dim else 0.0
        if diameter < tol or iterations >= max_iter:
            break
        iterations += 1

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]

        reflected = centroid + ALPHA * (centroid - worst)
        f_reflected = evaluate(reflected)
        if values[0] <= f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
            continue

        if f_reflected < values[0]:
            expanded = centroid + GAMMA * (reflected - centroid)
            f_expanded = evaluate(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
            continue

        if f_reflected < values[-1]:
            contracted = centroid + BETA * (reflected - centroid)
            f_contracted = evaluate(contracted)
            if f_contracted <= f_reflected:
                simplex[-1], values[-1] = contracted, f_contracted
                continue
        else:
            contracted = centroid + BETA * (worst - centroid)
            f_contracted = evaluate(contracted)
            if f_contracted < values[-1]:
                simplex[-1], values[-1] = contracted, f_contracted
                continue

        # Shrink towards the best vertex
        simplex[1:] = simplex[0] + DELTA * (simplex[1:] - simplex[0])
        values[1:] = [evaluate(x) for x in simplex[1:]]

    logger.debug(f"Nelder-Mead stopped after {iterations} iterations at value {values[0]:.3e}")
    return simplex[0].copy(), float(values[0])
