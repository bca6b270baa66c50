"""Damped nonlinear least squares (Levenberg-Marquardt).

The solver is generic: it sees only a residual callable over an
unconstrained real vector. Callers that need positivity fit in log10
space. Everything is deterministic for fixed inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "FitError",
    "SingularNormalEquationsError",
    "LMConfig",
    "FitResult",
    "numerical_jacobian",
    "levenberg_marquardt",
]


class FitError(RuntimeError):
    """A fit could not be carried out on the given inputs."""


class SingularNormalEquationsError(FitError):
    """Normal equations remained unsolvable at the damping ceiling."""


@dataclass(frozen=True)
class LMConfig:
    """Solver settings.

    max_step caps the infinity norm of one update; it keeps nearly flat
    directions (log-space roughness scales) from throwing the iterate out
    of the representable range before damping can react.
    """

    lambda0: float = 1e-3
    lambda_factor: float = 10.0
    lambda_max: float = 1e10
    max_iterations: int = 200
    gradient_tolerance: float = 1e-10
    step_tolerance: float = 1e-12
    cost_tolerance: float = 1e-12
    jacobian_step: float = 1e-6
    max_step: float = 3.0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for name in (
            "lambda0",
            "gradient_tolerance",
            "step_tolerance",
            "cost_tolerance",
            "jacobian_step",
            "max_step",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        if self.lambda_factor <= 1.0:
            raise ValueError("lambda_factor must exceed 1")


@dataclass(frozen=True)
class FitResult:
    """Solver output; rmse is re-evaluable from params on the same residuals."""

    params: np.ndarray
    cost: float
    rmse: float
    gradient_norm: float
    iterations: int
    converged: bool
    status: str


def numerical_jacobian(residual_fn, at, step: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian of residual_fn at the given point.

    Per-coordinate step h_j = step * max(|theta_j|, 1e-8), so the
    perturbation stays relative for large coordinates and bounded away
    from zero for small ones.
    """
    theta = np.asarray(at, dtype=float)
    r0 = np.asarray(residual_fn(theta), dtype=float)
    jac = np.empty((r0.size, theta.size))
    for j in range(theta.size):
        h = step * max(abs(theta[j]), 1e-8)
        up = theta.copy()
        up[j] += h
        dn = theta.copy()
        dn[j] -= h
        jac[:, j] = (
            np.asarray(residual_fn(up), dtype=float)
            - np.asarray(residual_fn(dn), dtype=float)
        ) / (2.0 * h)
    return jac


def _safe_cost(residuals: np.ndarray) -> float:
    # non-finite residuals mean the trial point is invalid, not cheap
    if not np.all(np.isfinite(residuals)):
        return float("inf")
    return float(residuals @ residuals)


def levenberg_marquardt(residual_fn, p0, config: LMConfig | None = None) -> FitResult:
    """Minimize the sum of squared residuals from the starting point p0.

    Classic Marquardt damping on diag(J^T J): multiply lambda by
    lambda_factor when a trial step raises the cost, divide when it
    lowers it. Accepted steps therefore never increase the cost.

    Stops on any of: gradient infinity norm <= gradient_tolerance,
    relative step <= step_tolerance, relative cost decrease <=
    cost_tolerance (all converged = True), or the iteration cap
    (converged = False).

    Raises:
        SingularNormalEquationsError: if the damped normal equations stay
            unsolvable at lambda_max.
    """
    cfg = config or LMConfig()
    theta = np.array(p0, dtype=float).ravel()
    if not np.all(np.isfinite(theta)):
        raise FitError("starting point must be finite")

    with np.errstate(all="ignore"):
        r = np.asarray(residual_fn(theta), dtype=float)
    cost = _safe_cost(r)
    if not np.isfinite(cost):
        raise FitError("residuals are not finite at the starting point")
    m = r.size
    lam = cfg.lambda0
    grad_norm = float("inf")
    status = "max_iterations"
    converged = False
    iterations = 0

    for iterations in range(1, cfg.max_iterations + 1):
        with np.errstate(all="ignore"):
            jac = numerical_jacobian(residual_fn, theta, cfg.jacobian_step)
        grad = jac.T @ r
        grad_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if grad_norm <= cfg.gradient_tolerance:
            status = "gradient"
            converged = True
            break

        normal = jac.T @ jac
        # Marquardt scaling: damp along diag(J^T J). The floor is relative
        # to the dominant diagonal entry: a coordinate whose Jacobian
        # column has died would otherwise be near-undamped and free to
        # drift many decades along a direction the data cannot see.
        diag = np.diag(normal)
        top = float(np.max(diag)) if diag.size else 0.0
        scale = np.maximum(diag, max(1e-6 * top, 1e-12))

        accepted = False
        while True:
            try:
                step_vec = np.linalg.solve(normal + lam * np.diag(scale), -grad)
            except np.linalg.LinAlgError:
                step_vec = None
            if step_vec is not None and np.all(np.isfinite(step_vec)):
                biggest = float(np.max(np.abs(step_vec)))
                if biggest > cfg.max_step:
                    step_vec = step_vec * (cfg.max_step / biggest)
                trial = theta + step_vec
                with np.errstate(all="ignore"):
                    r_trial = np.asarray(residual_fn(trial), dtype=float)
                trial_cost = _safe_cost(r_trial)
                if trial_cost < cost:
                    accepted = True
                    break
            lam *= cfg.lambda_factor
            if lam > cfg.lambda_max:
                if step_vec is None:
                    raise SingularNormalEquationsError(
                        "normal equations unsolvable at maximum damping"
                    )
                status = "lambda_max"
                break
        if not accepted:
            break

        lam = max(lam / cfg.lambda_factor, 1e-15)
        rel_step = float(np.max(np.abs(step_vec))) / max(
            1.0, float(np.max(np.abs(theta)))
        )
        decrease = cost - trial_cost
        theta, r, cost = trial, r_trial, trial_cost
        if rel_step <= cfg.step_tolerance:
            status = "step"
            converged = True
            break
        if decrease <= cfg.cost_tolerance * max(cost, 1e-300):
            status = "cost"
            converged = True
            break

    rmse = float(np.sqrt(cost / m)) if m else 0.0
    return FitResult(
        params=theta,
        cost=cost,
        rmse=rmse,
        gradient_norm=grad_norm,
        iterations=iterations,
        converged=converged,
        status=status,
    )
