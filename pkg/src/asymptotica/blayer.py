"""Boundary-layer two-point boundary value problems on [0, 1].

Two singularly perturbed problems are treated, both with a layer of width
O(eps) at the left boundary:

linear
    eps y'' + y' - y = 0,  y(0) = 1, y(1) = 0.  The multiscale solution in
    the layer variable integrates in closed form,

        y(x) = (1 - e^{2 - 2 eps + 1/eps})^{-1} e^{(1 - eps) x}
             + (1 - e^{-2 + 2 eps - 1/eps})^{-1} e^{(-1 + eps - 1/eps) x},

    which is evaluated in an algebraically rewritten form so the huge
    factor e^{1/eps} is never formed (it overflows doubles near
    eps ~ 0.0014).

nonlinear
    eps y'' + y' + y^2 = 0,  y(0) = 0, y(1) = 1/2.  In the layer variable
    xi = x/eps the problem becomes u'' + u' + eps u^2 = 0 on [0, 1/eps],
    whose slow amplitudes satisfy the same system as the quadratically
    damped oscillator:  A' = -eps A^2 - 2 eps^2 A^3,
    B' = 2 eps A B + 2 eps^2 A^2 B, with u = A + B e^{-xi}
    - (eps/2) B^2 e^{-2 xi}.  The left boundary condition fixes
    A(0) = -B0 + (eps/2) B0^2 in terms of B(0) = B0, and B0 is found by
    shooting: Newton (finite-difference derivative) on
    F(B0) = u(1/eps) - 1/2.

:func:`solve_bvp_fd` provides the independent reference: a second-order
centered finite-difference discretization, solved by tridiagonal
elimination (linear) or damped Newton (nonlinear).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_banded

from .msode import SolverError, catalog, integrate_reference


@dataclass(frozen=True)
class BvpProblem:
    eps: float
    kind: str  # "linear" or "nonlinear"
    boundary: tuple[float, float]

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise ValueError("eps must lie strictly between 0 and 1")
        if self.kind not in ("linear", "nonlinear"):
            raise ValueError(f"unknown problem kind {self.kind!r}")


def linear_problem(eps: float) -> BvpProblem:
    return BvpProblem(eps=eps, kind="linear", boundary=(1.0, 0.0))


def nonlinear_problem(eps: float) -> BvpProblem:
    return BvpProblem(eps=eps, kind="nonlinear", boundary=(0.0, 0.5))


_EPS_FLOOR = 1e-6


def linear_blayer_multiscale(x, eps: float):
    """Closed-form multiscale solution of the linear layer problem.

    Written as y = -e^{(1-eps)x - s} / (1 - e^{-s}) + e^{(-1+eps-1/eps)x}
    / (1 - e^{-s}) with s = 2 - 2 eps + 1/eps > 0, so every exponent is
    nonpositive on [0, 1]; both boundary values then come out exact.
    """
    if eps < _EPS_FLOOR:
        raise ValueError(f"eps below the overflow-safe floor {_EPS_FLOOR}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0.0) or np.any(x > 1.0):
        raise ValueError("x must lie in [0, 1]")
    s = 2.0 - 2.0 * eps + 1.0 / eps
    denom = 1.0 - np.exp(-s)
    grow = -np.exp((1.0 - eps) * x - s)
    decay = np.exp((-1.0 + eps - 1.0 / eps) * x)
    return (grow + decay) / denom


def solve_bvp_fd(problem: BvpProblem, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Second-order centered finite differences on a uniform grid of n cells.

    Returns (x, y) including the boundary rows, which carry the imposed
    boundary values exactly.  The linear problem is solved by tridiagonal
    elimination; the nonlinear one by damped Newton from a layer-profile
    initial guess (the eps u'' + u' = 0 solution through the same boundary
    values), iterated until the residual max-norm is at or below 1e-12.
    """
    if n < 64:
        raise ValueError("need at least 64 grid cells")
    eps = problem.eps
    h = 1.0 / n
    x = np.linspace(0.0, 1.0, n + 1)
    ya, yb = problem.boundary
    lower = eps / h**2 - 1.0 / (2.0 * h)  # y_{i-1}
    upper = eps / h**2 + 1.0 / (2.0 * h)  # y_{i+1}

    if problem.kind == "linear":
        diag = -2.0 * eps / h**2 - 1.0
        ab = np.zeros((3, n - 1))
        ab[0, 1:] = upper
        ab[1, :] = diag
        ab[2, :-1] = lower
        rhs = np.zeros(n - 1)
        rhs[0] -= lower * ya
        rhs[-1] -= upper * yb
        interior = solve_banded((1, 1), ab, rhs)
        return x, np.concatenate([[ya], interior, [yb]])

    # Nonlinear: h^2-scaled residual G_i = eps D2 y + D1 y + y^2 on interior
    # points (the scaling keeps the 1e-12 target above the roundoff floor).
    def residual(y_int: np.ndarray) -> np.ndarray:
        y = np.concatenate([[ya], y_int, [yb]])
        return (
            eps * (y[2:] - 2.0 * y[1:-1] + y[:-2])
            + 0.5 * h * (y[2:] - y[:-2])
            + h**2 * y[1:-1] ** 2
        )

    # Layer-profile initial guess from eps u'' + u' = 0 with the same BCs.
    b = (ya - yb) / (1.0 - np.exp(-1.0 / eps))
    a = ya - b
    y_int = a + b * np.exp(-x[1:-1] / eps)

    target = 1e-12
    for _ in range(100):
        res = residual(y_int)
        norm = np.max(np.abs(res))
        if norm <= target:
            break
        ab = np.zeros((3, n - 1))
        ab[0, 1:] = h**2 * upper
        ab[1, :] = -2.0 * eps + 2.0 * h**2 * y_int
        ab[2, :-1] = h**2 * lower
        step = solve_banded((1, 1), ab, -res)
        lam = 1.0
        while (
            np.max(np.abs(residual(y_int + lam * step))) > (1.0 - 0.5 * lam) * norm
            and lam > 1e-6
        ):
            lam *= 0.5
        y_int = y_int + lam * step
    else:
        raise SolverError(
            f"finite-difference Newton stalled with residual {norm:.3e}"
        )
    return x, np.concatenate([[ya], y_int, [yb]])


@dataclass(frozen=True)
class ShootingSolution:
    """Multiscale solution of the nonlinear layer problem."""

    eps: float
    b0: float
    iterations: int
    residual: float

    def inner(self, xi) -> np.ndarray:
        """u(xi) = A + B e^{-xi} - (eps/2) B^2 e^{-2 xi} on [0, 1/eps]."""
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        a_xi, b_xi = _amplitudes_at(self.eps, self.b0, xi)
        return a_xi + b_xi * np.exp(-xi) - 0.5 * self.eps * b_xi**2 * np.exp(-2.0 * xi)

    def __call__(self, x) -> np.ndarray:
        """y(x) in the outer variable, x in [0, 1]."""
        return self.inner(np.asarray(x, dtype=float) / self.eps)


_AMPLITUDE_RHS = catalog("quadratic_damped").amplitude_rhs


def _amplitudes_at(eps: float, b0: float, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Amplitudes A, B at the requested layer coordinates (any order, repeats ok)."""
    a0 = -b0 + 0.5 * eps * b0**2
    points, inverse = np.unique(xi, return_inverse=True)
    eval_pts = points if points[0] == 0.0 else np.concatenate([[0.0], points])
    traj = integrate_reference(
        lambda t, ab: _AMPLITUDE_RHS(t, ab, eps, 2),
        (a0, b0),
        (0.0, float(eval_pts[-1]) if eval_pts[-1] > 0 else 1.0),
        rtol=1e-10,
        atol=1e-12,
        t_eval=eval_pts,
    )
    vals = traj.y if points[0] == 0.0 else traj.y[1:]
    return vals[inverse, 0], vals[inverse, 1]


def nonlinear_blayer_multiscale(
    eps: float, shoot_tol: float = 1e-10, b0_seed: float = -1.0, max_iter: int = 50
) -> ShootingSolution:
    """Shooting solution of eps y'' + y' + y^2 = 0, y(0)=0, y(1)=1/2.

    Newton iteration on F(B0) = u(1/eps) - 1/2 with a finite-difference
    derivative; the seed B0 = -1 comes from the leading-order picture
    u ~ A + B e^{-xi} with u(0) = 0 and u -> A ~ 1/2, and converges across
    the supported range 0 < eps <= 0.2.
    """
    if not 0.0 < eps <= 0.2:
        raise ValueError("supported range is 0 < eps <= 0.2")
    xi_end = 1.0 / eps

    def boundary_mismatch(b0: float) -> float:
        a_xi, b_xi = _amplitudes_at(eps, b0, np.array([xi_end]))
        u_end = (
            a_xi[0]
            + b_xi[0] * np.exp(-xi_end)
            - 0.5 * eps * b_xi[0] ** 2 * np.exp(-2.0 * xi_end)
        )
        return u_end - 0.5

    b0 = b0_seed
    for iteration in range(1, max_iter + 1):
        f = boundary_mismatch(b0)
        if abs(f) < shoot_tol:
            return ShootingSolution(eps=eps, b0=b0, iterations=iteration, residual=abs(f))
        h = 1e-6 * max(1.0, abs(b0))
        slope = (boundary_mismatch(b0 + h) - boundary_mismatch(b0 - h)) / (2.0 * h)
        b0 = b0 - f / slope
    raise SolverError(
        f"shooting did not converge in {max_iter} iterations (|F|={abs(f):.3e})"
    )


def layer_half_width(x: np.ndarray, y: np.ndarray) -> float:
    """First x where the solution reaches 50% of its left boundary value."""
    target = 0.5 * y[0]
    crossing = np.nonzero((y[:-1] - target) * (y[1:] - target) <= 0.0)[0]
    if len(crossing) == 0:
        return float(x[-1])
    i = crossing[0]
    if y[i + 1] == y[i]:
        return float(x[i])
    frac = (target - y[i]) / (y[i + 1] - y[i])
    return float(x[i] + frac * (x[i + 1] - x[i]))
