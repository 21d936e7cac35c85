"""Constrained-problem abstraction, Lagrangian evaluation, and dual projection.

A problem is stored as a bundle of callables for the objective f, inequality
constraints g (satisfied when <= 0), equality constraints h (target 0), their
gradients, and the constraint Jacobian. Constraint values are always stacked
inequality-block first: c(x) = [g(x), h(x)], and the Jacobian columns follow
the same order. Every other module indexes by this contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class ConfigurationError(Exception):
    """Invalid configuration: bad dimensions, malformed inputs, unknown keys."""


class NumericalError(Exception):
    """A computation received or produced non-finite or unusable values."""


def as_vector(value, length: int, name: str) -> np.ndarray:
    """Coerce to a float64 vector of the given length or raise."""
    v = np.asarray(value, dtype=np.float64)
    if v.ndim == 0 and length == 1:
        v = v.reshape(1)
    if v.shape != (length,):
        raise ConfigurationError(f"{name} must have shape ({length},), got {v.shape}")
    return v


@dataclass(frozen=True)
class ConstrainedProblem:
    """Differentiable problem: min f(x) s.t. g(x) <= 0 and h(x) = 0.

    eval_constraint_jacobian returns the (transpose) Jacobian of the stacked
    constraints, shape (dim_primal, num_ineq + num_eq): column j is the
    gradient of the j-th entry of c(x) = [g(x), h(x)].

    All callables must be re-entrant; instances are immutable after
    construction and safe to share across threads.
    """

    dim_primal: int
    num_ineq: int
    num_eq: int
    eval_objective: Callable[[np.ndarray], float]
    eval_objective_grad: Callable[[np.ndarray], np.ndarray]
    eval_ineq: Callable[[np.ndarray], np.ndarray]
    eval_eq: Callable[[np.ndarray], np.ndarray]
    eval_constraint_jacobian: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.dim_primal < 1:
            raise ConfigurationError("dim_primal must be positive")
        if self.num_ineq < 0 or self.num_eq < 0:
            raise ConfigurationError("constraint counts must be non-negative")

    @property
    def num_constraints(self) -> int:
        return self.num_ineq + self.num_eq

    def constraints(self, x: np.ndarray) -> np.ndarray:
        """Stacked violations c(x) = [g(x), h(x)]."""
        return np.concatenate([
            as_vector(self.eval_ineq(x), self.num_ineq, "g(x)"),
            as_vector(self.eval_eq(x), self.num_eq, "h(x)"),
        ])


@dataclass(frozen=True)
class DualVector:
    """Lagrange multipliers: lam for inequalities (>= 0 after projection),
    mu for equalities (unrestricted)."""

    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", np.atleast_1d(np.asarray(self.lam, dtype=np.float64)))
        object.__setattr__(self, "mu", np.atleast_1d(np.asarray(self.mu, dtype=np.float64)))

    @staticmethod
    def zeros(num_ineq: int, num_eq: int) -> "DualVector":
        return DualVector(np.zeros(num_ineq), np.zeros(num_eq))

    @staticmethod
    def from_stacked(theta: np.ndarray, num_ineq: int) -> "DualVector":
        theta = np.asarray(theta, dtype=np.float64)
        return DualVector(theta[:num_ineq], theta[num_ineq:])

    @property
    def stacked(self) -> np.ndarray:
        """theta = [lam, mu] in constraint order."""
        return np.concatenate([self.lam, self.mu])


def _check_dual_dims(problem: ConstrainedProblem, duals: DualVector) -> None:
    if duals.lam.shape != (problem.num_ineq,):
        raise ConfigurationError(
            f"lambda has length {duals.lam.size}, problem declares {problem.num_ineq} inequalities"
        )
    if duals.mu.shape != (problem.num_eq,):
        raise ConfigurationError(
            f"mu has length {duals.mu.size}, problem declares {problem.num_eq} equalities"
        )


def evaluate_lagrangian(problem: ConstrainedProblem, x, duals: DualVector) -> float:
    """L(x, theta) = f(x) + lam . g(x) + mu . h(x)."""
    x = as_vector(x, problem.dim_primal, "x")
    _check_dual_dims(problem, duals)
    value = float(problem.eval_objective(x))
    if problem.num_ineq:
        g = as_vector(problem.eval_ineq(x), problem.num_ineq, "g(x)")
        value += float(duals.lam @ g)
    if problem.num_eq:
        h = as_vector(problem.eval_eq(x), problem.num_eq, "h(x)")
        value += float(duals.mu @ h)
    return value


def lagrangian_primal_gradient(problem: ConstrainedProblem, x, duals: DualVector) -> np.ndarray:
    """grad_x L = grad f(x) + Jc(x) @ theta, with theta = [lam, mu]."""
    x = as_vector(x, problem.dim_primal, "x")
    _check_dual_dims(problem, duals)
    grad = as_vector(problem.eval_objective_grad(x), problem.dim_primal, "grad f(x)")
    if problem.num_constraints == 0:
        return grad
    jac = np.asarray(problem.eval_constraint_jacobian(x), dtype=np.float64)
    expected = (problem.dim_primal, problem.num_constraints)
    if jac.shape != expected:
        raise ConfigurationError(f"constraint Jacobian must have shape {expected}, got {jac.shape}")
    return grad + jac @ duals.stacked


def project_duals(duals: DualVector) -> DualVector:
    """Clamp inequality multipliers at zero; equality multipliers untouched.

    Idempotent, and normalizes -0.0 to +0.0.
    """
    lam = np.where(duals.lam > 0.0, duals.lam, 0.0)
    return DualVector(lam, duals.mu)


# Central differences with per-coordinate step 1e-6 * max(1, |x_i|): the
# standard truncation/roundoff compromise for float64.
FD_REL_STEP = 1e-6


def central_difference_gradient(func: Callable[[np.ndarray], float], x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty(x.size)
    for i in range(x.size):
        h = FD_REL_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (float(func(xp)) - float(func(xm))) / (2.0 * h)
    return grad


def central_difference_jacobian(func: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                                num_outputs: int) -> np.ndarray:
    """Finite-difference (transpose) Jacobian, shape (len(x), num_outputs)."""
    x = np.asarray(x, dtype=np.float64)
    jac = np.empty((x.size, num_outputs))
    for i in range(x.size):
        h = FD_REL_STEP * max(1.0, abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        jac[i, :] = (np.asarray(func(xp), dtype=np.float64) -
                     np.asarray(func(xm), dtype=np.float64)) / (2.0 * h)
    return jac


@dataclass
class GradientCheckReport:
    """Outcome of comparing analytic gradients against central differences."""

    num_points: int
    tolerance: float
    max_rel_error_objective: float = 0.0
    max_rel_error_jacobian: float = 0.0
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (not self.failures
                and self.max_rel_error_objective <= self.tolerance
                and self.max_rel_error_jacobian <= self.tolerance)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"gradient check: {status} ({self.num_points} points, tol {self.tolerance:g})",
            f"  max rel error, objective gradient: {self.max_rel_error_objective:.3e}",
            f"  max rel error, constraint Jacobian: {self.max_rel_error_jacobian:.3e}",
        ]
        lines.extend(f"  failure: {msg}" for msg in self.failures)
        return "\n".join(lines)


def _rel_error(analytic: np.ndarray, reference: np.ndarray) -> float:
    if analytic.size == 0:
        return 0.0
    denom = np.maximum(1.0, np.abs(reference))
    return float(np.max(np.abs(analytic - reference) / denom))


def validate_gradients(problem: ConstrainedProblem, num_points: int, seed: int,
                       tolerance: float = 1e-5) -> GradientCheckReport:
    """Check analytic gradients/Jacobians against central differences at
    random points. Passes iff the max relative error is <= tolerance and all
    sampled evaluations are finite."""
    rng = np.random.default_rng(seed)
    report = GradientCheckReport(num_points=num_points, tolerance=tolerance)
    for k in range(num_points):
        x = rng.standard_normal(problem.dim_primal)
        f = float(problem.eval_objective(x))
        if not np.isfinite(f):
            report.failures.append(f"non-finite objective value at point {k}, x={x!r}")
            continue
        analytic_grad = as_vector(problem.eval_objective_grad(x), problem.dim_primal, "grad f(x)")
        fd_grad = central_difference_gradient(problem.eval_objective, x)
        if not np.all(np.isfinite(fd_grad)):
            report.failures.append(f"non-finite finite-difference gradient at point {k}, x={x!r}")
            continue
        report.max_rel_error_objective = max(report.max_rel_error_objective,
                                             _rel_error(analytic_grad, fd_grad))
        if problem.num_constraints:
            analytic_jac = np.asarray(problem.eval_constraint_jacobian(x), dtype=np.float64)
            fd_jac = central_difference_jacobian(problem.constraints, x, problem.num_constraints)
            if not np.all(np.isfinite(fd_jac)):
                report.failures.append(f"non-finite constraint value near point {k}, x={x!r}")
                continue
            report.max_rel_error_jacobian = max(report.max_rel_error_jacobian,
                                                _rel_error(analytic_jac, fd_jac))
    return report
