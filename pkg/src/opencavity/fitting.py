"""Damped least squares (Levenberg-Marquardt) with analytic Jacobians.

Small, dependency-free solver used by the peak, saturation and decay fits. It
keeps the best iterate so that a budget overrun can be reported with it.
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError

MAX_ITER = 200
RTOL = 1e-10


@dataclass
class LeastSquaresResult:
    x: np.ndarray
    residual_norm: float
    initial_residual_norm: float
    iterations: int
    converged: bool
    jacobian: np.ndarray
    nobs: int

    def covariance(self):
        """Parameter covariance from the residual-scaled Jacobian at the optimum."""
        dof = self.nobs - self.x.size
        jtj = self.jacobian.T @ self.jacobian
        s2 = self.residual_norm**2 / dof if dof > 0 else 0.0
        return s2 * np.linalg.pinv(jtj)

    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance()), 0.0, None))


def levenberg_marquardt(residuals, jacobian, x0, *, max_iter=MAX_ITER, rtol=RTOL,
                        valid=None, damping=1e-3):
    """Minimise ``sum(residuals(x)**2)`` starting from ``x0``.

    ``valid(x)`` may reject trial points (e.g. negative widths); rejected steps
    are treated like uphill steps. Converges when the relative decrease of the
    squared residual drops below ``rtol`` or no damped step improves it.
    Raises ConvergenceError carrying the best iterate after ``max_iter`` steps.
    """
    x = np.array(x0, dtype=float)
    r = np.asarray(residuals(x), dtype=float)
    cost = float(r @ r)
    initial = np.sqrt(cost)
    J = np.asarray(jacobian(x), dtype=float)
    lam = damping

    def result(it, converged):
        return LeastSquaresResult(x=x.copy(), residual_norm=float(np.sqrt(cost)),
                                  initial_residual_norm=float(initial), iterations=it,
                                  converged=converged, jacobian=J, nobs=r.size)

    for it in range(max_iter):
        if cost == 0.0:
            return result(it, True)
        g = J.T @ r
        A = J.T @ J
        diag = np.maximum(np.diag(A), 1e-300)
        while True:
            try:
                dx = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                dx = None
            if dx is not None and np.all(np.isfinite(dx)):
                x_new = x + dx
                if valid is None or valid(x_new):
                    r_new = np.asarray(residuals(x_new), dtype=float)
                    cost_new = float(r_new @ r_new)
                    if np.isfinite(cost_new) and cost_new < cost:
                        break
            lam *= 4.0
            if lam > 1e20:
                # no downhill direction left at working precision
                return result(it, True)
        rel = (cost - cost_new) / cost
        x, r, cost = x_new, r_new, cost_new
        J = np.asarray(jacobian(x), dtype=float)
        lam = max(lam / 3.0, 1e-12)
        small_step = np.linalg.norm(dx) <= 1e-14 * (np.linalg.norm(x) + 1e-14)
        if rel < rtol or small_step:
            return result(it + 1, True)
    raise ConvergenceError(f"no convergence within {max_iter} iterations", best=result(max_iter, False))
