"""Multiple-scales treatment of weakly nonlinear oscillators.

Each catalog entry bundles one oscillator with everything needed to validate
its slow-amplitude description against direct numerics:

* the original right hand side (integrated at high accuracy as the reference),
* the amplitude-equation right hand side in the slow variables,
* the reconstruction map from amplitudes back to the oscillator state,
* an initial-condition fitter (Newton on the reconstruction and its time
  derivative at t=0), and
* closed forms where they exist.

The shipped cases:

``damped_linear``
    y'' + eps y' + y = 0.  Amplitude equation dA/dt = -(eps/2) A - i(eps^2/8) A
    with reconstruction y = A e^{it} + c.c.; the exact solution through the
    characteristic polynomial is available for error measurements.  The
    textbook *non-uniform* direct expansion (:func:`naive_damped_expansion`)
    is kept alongside to demonstrate its breakdown at t ~ 1/eps.

``cubic``
    y'' + y = eps y^3.  dA/dt = -i(3 eps/2)|A|^2 A - i(15 eps^2/16)|A|^4 A,
    y = A e^{it} - (eps/8) A^3 e^{3it} + c.c.  The modulus of A is conserved.

``quadratic_damped``
    y'' + y' + eps y^2 = 0 with two real amplitudes: y = A + B e^{-t}
    - (eps/2) B^2 e^{-2t}, dA/dt = -eps A^2 - 2 eps^2 A^3,
    dB/dt = 2 eps A B + 2 eps^2 A^2 B.

``coupled_cubic``
    x'' + 2x - y = eps x y^2, y'' + 3y - 2x = eps y x^2.  Two complex
    amplitudes riding carriers e^{-it} and e^{-2it}; the amplitude moduli are
    conserved, so the amplitude system integrates in closed form and the
    oscillation frequencies shift with the initial data.

All flows are integrated with :func:`integrate_reference`, an error-controlled
embedded Runge-Kutta pair with dense output; complex amplitudes are evolved as
pairs of reals so one real-valued integrator serves every case.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp


class SolverError(RuntimeError):
    """Time integration failed (step-size underflow or non-convergence)."""


@dataclass(frozen=True)
class Trajectory:
    """Time grid plus state samples; ``y[i]`` is the state at ``t[i]``."""

    t: np.ndarray
    y: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.t) != len(self.y):
            raise ValueError("time grid and samples must have equal length")
        if len(self.t) > 1 and not np.all(np.diff(self.t) > 0):
            raise ValueError("time grid must be strictly increasing")


@dataclass(frozen=True)
class RunReport:
    """Outcome of one direct-vs-multiscale comparison run."""

    case: str
    eps: float
    horizon: float
    max_abs_error: float
    l2_error: float
    t: np.ndarray
    error: np.ndarray  # shape (n_components, n_samples)
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.max_abs_error < 0 or self.l2_error < 0 or np.any(self.error < 0):
            raise ValueError("error norms must be nonnegative")


def integrate_reference(
    rhs: Callable,
    y0,
    t_span: tuple[float, float],
    rtol: float = 1e-10,
    atol: float = 1e-12,
    t_eval=None,
    args: tuple = (),
) -> Trajectory:
    """High-accuracy reference integration with an embedded RK pair.

    Wraps the Dormand-Prince 5(4) stepper with error control and dense
    output (quartic interpolation on accepted steps).  Deterministic for
    fixed inputs.  Raises :class:`SolverError` on step-size underflow.
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError("rtol and atol must be positive")
    sol = solve_ivp(
        rhs,
        t_span,
        np.asarray(y0, dtype=float),
        method="RK45",
        rtol=rtol,
        atol=atol,
        t_eval=t_eval,
        dense_output=t_eval is None,
        args=args or None,
    )
    if not sol.success:
        raise SolverError(
            f"reference integration failed at t={sol.t[-1] if len(sol.t) else t_span[0]}: "
            f"{sol.message} (nfev={sol.nfev})"
        )
    span = abs(t_span[1] - t_span[0])
    if len(sol.t) > 1 and np.min(np.abs(np.diff(sol.t))) < 1e-14 * span and t_eval is None:
        raise SolverError("step size underflow below 1e-14 of the integration span")
    return Trajectory(
        t=sol.t,
        y=sol.y.T.copy(),
        meta={"nfev": sol.nfev, "rtol": rtol, "atol": atol, "n_steps": len(sol.t)},
    )


@dataclass(frozen=True)
class CaseSpec:
    """One catalog entry; see the module docstring for the equations."""

    name: str
    n_components: int
    state_dim: int
    n_amplitudes: int
    real_amplitudes: bool
    validity_exponent: int
    default_ics: tuple[float, ...]
    original_rhs: Callable  # (t, state, eps) -> dstate
    amplitude_rhs: Callable  # (t, amps, eps, terms) -> damps
    reconstruct: Callable  # (t, amps, eps) -> components
    reconstruct_dt: Callable  # (t, amps, eps) -> d/dt components
    amplitude_closed_form: Optional[Callable] = None  # (t, amps0, eps, terms) -> amps
    exact: Optional[Callable] = None  # (t, eps) -> components


# --- damped linear oscillator -------------------------------------------------

def _damped_linear_rhs(t, s, eps):
    y, v = s
    return np.array([v, -y - eps * v])


def _damped_linear_amp_rhs(t, a, eps, terms=2):
    rate = -0.5 * eps
    if terms >= 2:
        rate = rate - 0.125j * eps * eps
    return rate * a


def _damped_linear_rec(t, a, eps):
    return np.real(2.0 * a[0] * np.exp(1j * np.asarray(t)))[np.newaxis]


def _damped_linear_rec_dt(t, a, eps, terms=2):
    da = _damped_linear_amp_rhs(t, a, eps, terms)
    return np.real(2.0 * (da[0] + 1j * a[0]) * np.exp(1j * np.asarray(t)))[np.newaxis]


def _damped_linear_amp_closed(t, a0, eps, terms=2):
    rate = -0.5 * eps - (0.125j * eps * eps if terms >= 2 else 0.0)
    return a0[np.newaxis, :] * np.exp(rate * np.asarray(t))[:, np.newaxis]


def _damped_linear_exact(t, eps):
    omega = np.sqrt(1.0 - 0.25 * eps * eps)
    lam = -0.5 * eps + 1j * omega
    c = -np.conj(lam) / (lam - np.conj(lam))
    return np.real(2.0 * c * np.exp(lam * np.asarray(t)))[np.newaxis]


# --- cubic oscillator ---------------------------------------------------------

def _cubic_rhs(t, s, eps):
    y, v = s
    return np.array([v, -y + eps * y**3])


def _cubic_amp_rhs(t, a, eps, terms=2):
    mod2 = np.abs(a) ** 2
    da = -1.5j * eps * mod2 * a
    if terms >= 2:
        da = da - 0.9375j * eps * eps * mod2**2 * a
    return da


def _cubic_rec(t, a, eps):
    e1 = np.exp(1j * np.asarray(t))
    return np.real(2.0 * (a[0] * e1 - 0.125 * eps * a[0] ** 3 * e1**3))[np.newaxis]


def _cubic_rec_dt(t, a, eps, terms=2):
    da = _cubic_amp_rhs(t, a, eps, terms)
    e1 = np.exp(1j * np.asarray(t))
    lead = (da[0] + 1j * a[0]) * e1
    corr = 0.125 * eps * (3.0 * a[0] ** 2 * da[0] + 3j * a[0] ** 3) * e1**3
    return np.real(2.0 * (lead - corr))[np.newaxis]


def _cubic_amp_closed(t, a0, eps, terms=2):
    mod2 = np.abs(a0[0]) ** 2  # conserved by the flow
    rate = -1.5j * eps * mod2
    if terms >= 2:
        rate = rate - 0.9375j * eps * eps * mod2**2
    return a0[np.newaxis, :] * np.exp(rate * np.asarray(t))[:, np.newaxis]


# --- damped oscillator with quadratic nonlinearity ----------------------------

def _quadratic_rhs(t, s, eps):
    y, v = s
    return np.array([v, -v - eps * y**2])


def _quadratic_amp_rhs(t, ab, eps, terms=2):
    a, b = ab
    da = -eps * a**2
    db = 2.0 * eps * a * b
    if terms >= 2:
        da = da - 2.0 * eps * eps * a**3
        db = db + 2.0 * eps * eps * a**2 * b
    return np.array([da, db])


def _quadratic_rec(t, ab, eps):
    a, b = ab
    decay = np.exp(-np.asarray(t, dtype=float))
    return (a + b * decay - 0.5 * eps * b**2 * decay**2)[np.newaxis]


def _quadratic_rec_dt(t, ab, eps, terms=2):
    a, b = ab
    da, db = _quadratic_amp_rhs(t, ab, eps, terms)
    decay = np.exp(-np.asarray(t, dtype=float))
    return (da + (db - b) * decay - eps * (b * db - b**2) * decay**2)[np.newaxis]


# --- two coupled cubic oscillators --------------------------------------------

def _coupled_rhs(t, s, eps):
    x, y, vx, vy = s
    return np.array(
        [vx, vy, -2.0 * x + y + eps * x * y**2, -3.0 * y + 2.0 * x + eps * y * x**2]
    )


def _coupled_amp_rhs(t, ab, eps, terms=2):
    a, b = ab
    return np.array(
        [
            0.5j * eps * (3.0 * np.abs(a) ** 2 - 2.0 * np.abs(b) ** 2) * a,
            0.5j * eps * (3.0 * np.abs(b) ** 2 - np.abs(a) ** 2) * b,
        ]
    )


def _coupled_rec(t, ab, eps):
    a, b = ab
    e1 = np.exp(-1j * np.asarray(t))
    e2 = e1**2
    x = np.real(2.0 * (a * e1 + b * e2))
    y = np.real(2.0 * (a * e1 - 2.0 * b * e2))
    return np.stack([x, y])


def _coupled_rec_dt(t, ab, eps, terms=2):
    a, b = ab
    da, db = _coupled_amp_rhs(t, ab, eps, terms)
    e1 = np.exp(-1j * np.asarray(t))
    e2 = e1**2
    fa = (da - 1j * a) * e1
    fb = (db - 2j * b) * e2
    return np.stack([np.real(2.0 * (fa + fb)), np.real(2.0 * (fa - 2.0 * fb))])


def _coupled_amp_closed(t, ab0, eps, terms=2):
    a0, b0 = ab0
    ma, mb = np.abs(a0) ** 2, np.abs(b0) ** 2
    tt = np.asarray(t)
    return np.stack(
        [
            a0 * np.exp(0.5j * eps * (3.0 * ma - 2.0 * mb) * tt),
            b0 * np.exp(0.5j * eps * (3.0 * mb - ma) * tt),
        ],
        axis=-1,
    )


def coupled_cubic_frequencies(a0: complex, b0: complex, eps: float) -> tuple[float, float]:
    """Initial-data-dependent oscillation frequencies of the reconstructed motion.

    The carriers at frequencies 1 and 2 are shifted by the conserved moduli:
    Omega_1 = 1 + eps(|B0|^2 - 3|A0|^2/2), Omega_2 = 2 + eps(|A0|^2/2 - 3|B0|^2/2).
    """
    ma, mb = abs(a0) ** 2, abs(b0) ** 2
    return 1.0 + eps * (mb - 1.5 * ma), 2.0 + eps * (0.5 * ma - 1.5 * mb)


def _coupled_default_ics() -> tuple[float, ...]:
    amps = np.array([0.3 + 0.0j, 0.3 + 0.0j])
    vals = _coupled_rec(0.0, amps, 0.0)
    ders = _coupled_rec_dt(0.0, amps, 0.0)
    return (float(vals[0]), float(vals[1]), float(ders[0]), float(ders[1]))


_CATALOG: dict[str, CaseSpec] = {}


def _register(case: CaseSpec):
    _CATALOG[case.name] = case


_register(
    CaseSpec(
        name="damped_linear",
        n_components=1,
        state_dim=2,
        n_amplitudes=1,
        real_amplitudes=False,
        validity_exponent=3,
        default_ics=(1.0, 0.0),
        original_rhs=_damped_linear_rhs,
        amplitude_rhs=_damped_linear_amp_rhs,
        reconstruct=_damped_linear_rec,
        reconstruct_dt=_damped_linear_rec_dt,
        amplitude_closed_form=_damped_linear_amp_closed,
        exact=_damped_linear_exact,
    )
)
_register(
    CaseSpec(
        name="cubic",
        n_components=1,
        state_dim=2,
        n_amplitudes=1,
        real_amplitudes=False,
        validity_exponent=3,
        default_ics=(1.0, 0.0),
        original_rhs=_cubic_rhs,
        amplitude_rhs=_cubic_amp_rhs,
        reconstruct=_cubic_rec,
        reconstruct_dt=_cubic_rec_dt,
        amplitude_closed_form=_cubic_amp_closed,
    )
)
_register(
    CaseSpec(
        name="quadratic_damped",
        n_components=1,
        state_dim=2,
        n_amplitudes=2,
        real_amplitudes=True,
        validity_exponent=3,
        default_ics=(1.0, 1.0),
        original_rhs=_quadratic_rhs,
        amplitude_rhs=_quadratic_amp_rhs,
        reconstruct=_quadratic_rec,
        reconstruct_dt=_quadratic_rec_dt,
    )
)
_register(
    CaseSpec(
        name="coupled_cubic",
        n_components=2,
        state_dim=4,
        n_amplitudes=2,
        real_amplitudes=False,
        validity_exponent=2,
        default_ics=_coupled_default_ics(),
        original_rhs=_coupled_rhs,
        amplitude_rhs=_coupled_amp_rhs,
        reconstruct=_coupled_rec,
        reconstruct_dt=_coupled_rec_dt,
        amplitude_closed_form=_coupled_amp_closed,
    )
)


def catalog(name: str) -> CaseSpec:
    """Look up a registered case; raises KeyError listing known names."""
    try:
        return _CATALOG[name]
    except KeyError:
        raise KeyError(
            f"unknown case {name!r}; known cases: {sorted(_CATALOG)}"
        ) from None


def case_names() -> list[str]:
    return sorted(_CATALOG)


def _amps_to_real(amps: np.ndarray, real_amplitudes: bool) -> np.ndarray:
    if real_amplitudes:
        return np.asarray(amps, dtype=complex).real.copy()
    a = np.asarray(amps, dtype=complex)
    return np.concatenate([a.real, a.imag])


def _real_to_amps(vec: np.ndarray, n: int, real_amplitudes: bool) -> np.ndarray:
    if real_amplitudes:
        return np.asarray(vec[:n], dtype=float)
    return vec[:n] + 1j * vec[n : 2 * n]


def integrate_amplitude(
    case: CaseSpec,
    amps0,
    t_span: tuple[float, float],
    eps: float,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    terms: int = 2,
    t_eval=None,
    use_closed_form: bool = False,
) -> Trajectory:
    """Evolve the slow amplitudes; samples are complex with shape (n_t, n_amp).

    With ``use_closed_form`` the analytic amplitude solution replaces the
    integrator for cases that have one (the coupled oscillators conserve their
    moduli, so their amplitude system is solvable in closed form).
    """
    amps0 = np.asarray(amps0)
    if use_closed_form:
        if case.amplitude_closed_form is None:
            raise ValueError(f"case {case.name} has no closed-form amplitudes")
        tt = np.linspace(*t_span, 512) if t_eval is None else np.asarray(t_eval)
        return Trajectory(
            t=tt,
            y=np.asarray(case.amplitude_closed_form(tt, amps0, eps, terms)),
            meta={"eps": eps, "case": case.name, "closed_form": True},
        )

    def rhs(t, vec):
        amps = _real_to_amps(vec, case.n_amplitudes, case.real_amplitudes)
        return _amps_to_real(case.amplitude_rhs(t, amps, eps, terms), case.real_amplitudes)

    traj = integrate_reference(
        rhs, _amps_to_real(amps0, case.real_amplitudes), t_span, rtol, atol, t_eval
    )
    n = case.n_amplitudes
    if case.real_amplitudes:
        samples = traj.y[:, :n].astype(complex)
    else:
        samples = traj.y[:, :n] + 1j * traj.y[:, n : 2 * n]
    meta = dict(traj.meta)
    meta.update(eps=eps, case=case.name, terms=terms)
    return Trajectory(t=traj.t, y=samples, meta=meta)


def fit_initial_amplitudes(
    case: CaseSpec,
    ics,
    eps: float,
    newton_tol: float = 1e-12,
    terms: int = 2,
    max_iter: int = 50,
) -> np.ndarray:
    """Amplitudes whose reconstruction matches the state and its derivative at t=0.

    Newton iteration with a finite-difference Jacobian, started from the
    eps=0 fit (where the reconstruction is linear in the amplitudes).
    """
    ics = np.asarray(ics, dtype=float)
    if len(ics) != case.state_dim:
        raise ValueError(f"case {case.name} needs {case.state_dim} initial values")
    n_real = case.n_amplitudes if case.real_amplitudes else 2 * case.n_amplitudes

    def residual(vec: np.ndarray, e: float) -> np.ndarray:
        amps = _real_to_amps(vec, case.n_amplitudes, case.real_amplitudes)
        vals = np.atleast_1d(np.squeeze(case.reconstruct(0.0, amps, e)))
        ders = np.atleast_1d(np.squeeze(case.reconstruct_dt(0.0, amps, e, terms)))
        return np.concatenate([vals, ders]) - ics

    def fd_jacobian(vec: np.ndarray, e: float) -> np.ndarray:
        jac = np.empty((case.state_dim, n_real))
        h = 1e-7
        for j in range(n_real):
            step = np.zeros(n_real)
            step[j] = h
            jac[:, j] = (residual(vec + step, e) - residual(vec - step, e)) / (2 * h)
        return jac

    # eps = 0: the reconstruction is linear, so one Newton step is exact
    vec = np.zeros(n_real)
    base = residual(vec, 0.0)
    lin = np.empty((case.state_dim, n_real))
    for j in range(n_real):
        unit = np.zeros(n_real)
        unit[j] = 1.0
        lin[:, j] = residual(unit, 0.0) - base
    vec = np.linalg.solve(lin, -base)
    if eps == 0.0:
        return _real_to_amps(vec, case.n_amplitudes, case.real_amplitudes)

    # Damped Newton, continued in eps so the iterate stays on the branch
    # connected to the eps = 0 fit instead of jumping to a spurious root.
    iterations = 0
    for e in np.linspace(0.0, eps, 2 + int(abs(eps) / 0.025))[1:]:
        while True:
            res = residual(vec, e)
            norm = np.max(np.abs(res))
            if norm < newton_tol:
                break
            if iterations >= max_iter:
                raise SolverError(
                    f"initial-amplitude fit for {case.name} did not reach "
                    f"{newton_tol} in {max_iter} Newton iterations "
                    f"(residual {norm:.3e})"
                )
            step = np.linalg.solve(fd_jacobian(vec, e), -res)
            lam = 1.0
            while (
                np.max(np.abs(residual(vec + lam * step, e))) > (1 - 0.5 * lam) * norm
                and lam > 1e-3
            ):
                lam *= 0.5
            vec = vec + lam * step
            iterations += 1
    return _real_to_amps(vec, case.n_amplitudes, case.real_amplitudes)


def naive_damped_expansion(t, eps: float):
    """Direct (non-uniform) two-term expansion of the damped linear oscillator.

    y = cos t - (eps/2)(sin t + t cos t); the secular t cos t term destroys
    the ordering once t ~ 1/eps, which is exactly what the multiple-scales
    reconstruction repairs.
    """
    t = np.asarray(t, dtype=float)
    return np.cos(t) - 0.5 * eps * (np.sin(t) + t * np.cos(t))


def reconstruct_on_grid(
    case: CaseSpec, amp_traj: Trajectory, eps: float
) -> np.ndarray:
    """Apply the case's reconstruction map along an amplitude trajectory."""
    amps = amp_traj.y.T  # (n_amp, n_t); reconstructions broadcast over time
    return np.asarray(case.reconstruct(amp_traj.t, amps, eps))


def compare(
    case: CaseSpec,
    eps: float,
    horizon_exponent: int | None = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
    terms: int = 2,
    ics=None,
    n_samples: int = 2048,
    use_closed_form: bool = False,
    keep_trajectories: bool = False,
    horizon: float | None = None,
) -> RunReport:
    """Run the direct and multiscale paths on a shared grid and record errors.

    The horizon is eps**(-horizon_exponent), or ``horizon`` when given
    explicitly; the output grid always holds ``n_samples`` uniform points so
    error norms are comparable across eps.  ``l2_error`` is the RMS of the
    pointwise euclidean error norm.  When the case has an exact solution its
    errors are recorded in ``stats`` as well.
    """
    if (horizon is None) == (horizon_exponent is None):
        raise ValueError("give exactly one of horizon_exponent and horizon")
    limit = float(eps) ** (-(case.validity_exponent + 1)) if eps > 0 else np.inf
    if horizon is None:
        if horizon_exponent > case.validity_exponent + 1:
            raise ValueError(
                f"horizon exponent {horizon_exponent} exceeds the validity "
                f"exponent {case.validity_exponent} + 1 for case {case.name}"
            )
        horizon = float(eps) ** (-horizon_exponent) if horizon_exponent else 1.0
    elif horizon > limit:
        raise ValueError(
            f"horizon {horizon} exceeds eps^-(validity_exponent+1) = {limit}"
        )
    ics = case.default_ics if ics is None else tuple(ics)
    grid = np.linspace(0.0, horizon, n_samples)

    direct = integrate_reference(
        case.original_rhs, ics, (0.0, horizon), rtol, atol, t_eval=grid, args=(eps,)
    )
    y_direct = direct.y[:, : case.n_components].T

    amps0 = fit_initial_amplitudes(case, ics, eps, terms=terms)
    amp_traj = integrate_amplitude(
        case, amps0, (0.0, horizon), eps, rtol, atol, terms, t_eval=grid,
        use_closed_form=use_closed_form,
    )
    y_ms = reconstruct_on_grid(case, amp_traj, eps)

    err = np.abs(y_direct - y_ms)
    stats = {
        "nfev_direct": direct.meta.get("nfev"),
        "nfev_amplitude": amp_traj.meta.get("nfev"),
        "terms": terms,
        "rtol": rtol,
        "atol": atol,
        "ics": list(ics),
    }
    if case.exact is not None:
        y_exact = np.asarray(case.exact(grid, eps))
        stats["max_abs_error_vs_exact"] = float(np.max(np.abs(y_exact - y_ms)))
        stats["max_abs_error_direct_vs_exact"] = float(
            np.max(np.abs(y_exact - y_direct))
        )
    if keep_trajectories:
        stats["trajectories"] = {"y_direct": y_direct, "y_multiscale": np.real(y_ms)}
    return RunReport(
        case=case.name,
        eps=eps,
        horizon=horizon,
        max_abs_error=float(err.max()),
        l2_error=float(np.sqrt(np.mean(np.sum(err**2, axis=0)))),
        t=grid,
        error=err,
        stats=stats,
    )
