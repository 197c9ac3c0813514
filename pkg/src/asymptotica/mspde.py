"""Wave-packet multiple scales for 1D dispersive PDEs on periodic domains.

Two second-order-in-time model equations are supported:

klein_gordon
    u_tt - u_xx + u = eps u^2,   omega(k) = sqrt(1 + k^2).
    The slowly varying envelope A of a carrier e^{i(kx - omega t)} obeys a
    nonlinear Schroedinger equation,

        A_t = -(k/omega) A_x + i/(2 omega^3) A_xx + i eps^2 5/(3 omega) |A|^2 A,

    and the field is rebuilt as u = A e^{i theta} + c.c. with the optional
    first-order correction eps (2|A|^2 - (1/3) A^2 e^{2 i theta} + c.c.-part).

fourth_order
    u_tt + u_xx + u_xxxx + u = eps u^3,   omega(k) = sqrt(k^4 - k^2 + 1).
    A single envelope obeys the transport equation
    A_t + omega'(k) A_x = i eps 3/(2 omega) |A|^2 A (eps kept explicit).
    The cubic harmonic e^{3 i theta} resonates exactly when
    omega(3k) = 3 omega(k), i.e. at k = 1/sqrt(3); at that carrier a second
    envelope B rides e^{3 i theta} and the pair couples through

        2 i omega(k)  (A_t + omega'(k)  A_x) = eps (-3|A|^2 A - 6|B|^2 A - 3 conj(A)^2 B),
        2 i omega(3k) (B_t + omega'(3k) B_x) = eps (-3|B|^2 B - 6|A|^2 B - A^3).

Direct reference solutions come from a Fourier pseudospectral first-order
system in transform space with error-controlled time stepping and alias-free
nonlinear products (2/3 rule for quadratic terms, 1/2 rule for cubic ones).
Envelope equations are integrated by Strang-split steps whose linear part is
exact in transform space and whose pointwise nonlinear part is exact
(single wave) or one classical fourth-order Runge-Kutta stage (coupled pair).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .msode import RunReport, SolverError


# --- dispersion ----------------------------------------------------------------

@dataclass(frozen=True)
class Dispersion:
    kind: str
    omega: Callable[[np.ndarray], np.ndarray]
    omega_prime: Callable[[np.ndarray], np.ndarray]


def _kg_omega(k):
    return np.sqrt(1.0 + np.asarray(k) ** 2)


def _kg_omega_prime(k):
    k = np.asarray(k)
    return k / np.sqrt(1.0 + k**2)


def _fourth_omega(k):
    k2 = np.asarray(k) ** 2
    return np.sqrt(k2 * k2 - k2 + 1.0)


def _fourth_omega_prime(k):
    k = np.asarray(k)
    return (2.0 * k**3 - k) / _fourth_omega(k)


_DISPERSIONS = {
    "klein_gordon": Dispersion("klein_gordon", _kg_omega, _kg_omega_prime),
    "fourth_order": Dispersion("fourth_order", _fourth_omega, _fourth_omega_prime),
}


def dispersion(kind: str) -> Dispersion:
    try:
        return _DISPERSIONS[kind]
    except KeyError:
        raise KeyError(
            f"unknown dispersion kind {kind!r}; known: {sorted(_DISPERSIONS)}"
        ) from None


def dispersion_eval(d: Dispersion, k: float) -> tuple[float, float]:
    """(omega, omega') at carrier wavenumber k, from the closed formulas."""
    return float(d.omega(k)), float(d.omega_prime(k))


def phase_match_residual(d: Dispersion, n: int, k: float) -> float:
    """omega(n k) - n omega(k); a zero makes the n-th harmonic resonant."""
    if n not in (2, 3):
        raise ValueError("harmonic order must be 2 or 3")
    return float(d.omega(n * k) - n * d.omega(k))


def find_phase_matched(
    d: Dispersion, n: int, k_range: tuple[float, float], n_grid: int = 2000
) -> list[float]:
    """Phase-matched carriers in k_range, bisected to 1e-12 from grid sign changes."""
    lo, hi = k_range
    if hi <= lo:
        return []
    ks = np.linspace(lo, hi, n_grid)
    vals = np.array([phase_match_residual(d, n, k) for k in ks])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        a, b = ks[i], ks[i + 1]
        fa = vals[i]
        while b - a > 1e-12:
            mid = 0.5 * (a + b)
            fm = phase_match_residual(d, n, mid)
            if fa * fm <= 0:
                b = mid
            else:
                a, fa = mid, fm
        roots.append(0.5 * (a + b))
    roots.extend(float(k) for k in ks[vals == 0.0])
    return sorted(roots)


# --- fields ---------------------------------------------------------------------

def _check_power_of_two(n: int):
    if n < 2 or n & (n - 1):
        raise ValueError(f"grid size {n} is not a power of two")


def grid_points(length: float, n: int) -> np.ndarray:
    return np.arange(n) * (length / n)


@dataclass(frozen=True)
class WavePacketField:
    """Complex envelope samples on a periodic grid plus carrier metadata."""

    length: float
    values: np.ndarray
    k: float
    eps: float
    kind: str = "klein_gordon"

    def __post_init__(self):
        _check_power_of_two(len(self.values))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        m = self.k * self.length / (2.0 * np.pi)
        if abs(m - round(m)) > 1e-9:
            raise ValueError(
                f"carrier k={self.k} is not an integer multiple of 2*pi/L"
            )

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def x(self) -> np.ndarray:
        return grid_points(self.length, self.n)


@dataclass(frozen=True)
class RealField:
    """Real field samples u and their time derivative on a periodic grid."""

    length: float
    u: np.ndarray
    ut: np.ndarray

    def __post_init__(self):
        _check_power_of_two(len(self.u))
        if len(self.u) != len(self.ut):
            raise ValueError("u and ut must share the grid")
        object.__setattr__(self, "u", np.asarray(self.u, dtype=float))
        object.__setattr__(self, "ut", np.asarray(self.ut, dtype=float))

    @property
    def n(self) -> int:
        return len(self.u)

    @property
    def x(self) -> np.ndarray:
        return grid_points(self.length, self.n)


@dataclass(frozen=True)
class DirectRun:
    """Snapshots of a direct PDE solve."""

    t: np.ndarray
    fields: list[RealField]
    meta: dict = field(default_factory=dict)


def _wavenumbers_rfft(length: float, n: int) -> np.ndarray:
    return 2.0 * np.pi * np.fft.rfftfreq(n, d=length / n)


def _dealias_mask(n: int, rule: str) -> np.ndarray:
    cut = n // 3 if rule == "quadratic" else n // 4
    mask = np.zeros(n // 2 + 1)
    mask[: cut + 1] = 1.0
    return mask


def energy(fld: RealField, eps: float, kind: str) -> float:
    """Conserved energy of the direct flow, by spectral differentiation.

    klein_gordon: int 1/2 u_t^2 + 1/2 u_x^2 + 1/2 u^2 - (eps/3) u^3 dx
    fourth_order: int 1/2 u_t^2 - 1/2 u_x^2 + 1/2 u_xx^2 + 1/2 u^2 - (eps/4) u^4 dx
    """
    dx = fld.length / fld.n
    kappa = _wavenumbers_rfft(fld.length, fld.n)
    u_hat = np.fft.rfft(fld.u)
    ux = np.fft.irfft(1j * kappa * u_hat, fld.n)
    if kind == "klein_gordon":
        density = 0.5 * (fld.ut**2 + ux**2 + fld.u**2) - eps / 3.0 * fld.u**3
    elif kind == "fourth_order":
        uxx = np.fft.irfft(-(kappa**2) * u_hat, fld.n)
        density = (
            0.5 * (fld.ut**2 - ux**2 + uxx**2 + fld.u**2) - eps / 4.0 * fld.u**4
        )
    else:
        raise KeyError(f"unknown kind {kind!r}")
    return float(np.sum(density) * dx)


def _solve_direct(
    eps: float,
    u0: RealField,
    t_end: float,
    rtol: float,
    kind: str,
    t_eval: Sequence[float] | None,
    atol: float,
) -> DirectRun:
    n = u0.n
    kappa = _wavenumbers_rfft(u0.length, n)
    if kind == "klein_gordon":
        symbol = kappa**2 + 1.0
        mask = _dealias_mask(n, "quadratic")
        power = 2
    else:
        symbol = kappa**4 - kappa**2 + 1.0
        mask = _dealias_mask(n, "cubic")
        power = 3
    m = n // 2 + 1

    def pack(u_hat, v_hat):
        return np.concatenate([u_hat.real, u_hat.imag, v_hat.real, v_hat.imag])

    def unpack(z):
        u_hat = z[:m] + 1j * z[m : 2 * m]
        v_hat = z[2 * m : 3 * m] + 1j * z[3 * m :]
        return u_hat, v_hat

    def rhs(t, z):
        u_hat, v_hat = unpack(z)
        u = np.fft.irfft(u_hat, n)
        nonlinear = mask * np.fft.rfft(u**power)
        return pack(v_hat, -symbol * u_hat + eps * nonlinear)

    z0 = pack(np.fft.rfft(u0.u), np.fft.rfft(u0.ut))
    times = [t_end] if t_eval is None else list(t_eval)
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        z0,
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=times,
    )
    if not sol.success:
        raise SolverError(f"direct {kind} solve failed: {sol.message}")
    fields = []
    for j in range(len(sol.t)):
        u_hat, v_hat = unpack(sol.y[:, j])
        fields.append(
            RealField(u0.length, np.fft.irfft(u_hat, n), np.fft.irfft(v_hat, n))
        )
    return DirectRun(
        t=sol.t, fields=fields, meta={"nfev": sol.nfev, "rtol": rtol, "atol": atol}
    )


def solve_kg_direct(
    eps: float,
    u0: RealField,
    t_end: float,
    rtol: float = 1e-10,
    t_eval: Sequence[float] | None = None,
    atol: float = 1e-12,
) -> DirectRun:
    """Pseudospectral reference solve of u_tt - u_xx + u = eps u^2."""
    return _solve_direct(eps, u0, t_end, rtol, "klein_gordon", t_eval, atol)


def solve_fourth_direct(
    eps: float,
    u0: RealField,
    t_end: float,
    rtol: float = 1e-10,
    t_eval: Sequence[float] | None = None,
    atol: float = 1e-12,
) -> DirectRun:
    """Pseudospectral reference solve of u_tt + u_xx + u_xxxx + u = eps u^3."""
    return _solve_direct(eps, u0, t_end, rtol, "fourth_order", t_eval, atol)


# --- envelope solvers -----------------------------------------------------------

def envelope_coefficients(fld: WavePacketField) -> tuple[float, float, float]:
    """(advection speed, dispersion coefficient, cubic coefficient) for the envelope.

    The envelope equation is A_t = -c A_x + i beta A_xx + i gamma |A|^2 A with
    c = omega'(k) for both kinds, beta = 1/(2 omega^3) for klein_gordon (the
    second time derivative has been traded for a spatial one, keeping the
    equation first order in time) and beta = 0 for fourth_order, and
    gamma = eps^2 5/(3 omega) resp. eps 3/(2 omega).
    """
    d = dispersion(fld.kind)
    omega, omega_p = dispersion_eval(d, fld.k)
    if fld.kind == "klein_gordon":
        return omega_p, 1.0 / (2.0 * omega**3), fld.eps**2 * 5.0 / (3.0 * omega)
    return omega_p, 0.0, fld.eps * 3.0 / (2.0 * omega)


def envelope_rhs(fld: WavePacketField) -> np.ndarray:
    """Instantaneous A_t of the envelope equation, by spectral derivatives."""
    c, beta, gamma = envelope_coefficients(fld)
    kappa = 2.0 * np.pi * np.fft.fftfreq(fld.n, d=fld.length / fld.n)
    a_hat = np.fft.fft(fld.values)
    a_x = np.fft.ifft(1j * kappa * a_hat)
    a_xx = np.fft.ifft(-(kappa**2) * a_hat)
    return (
        -c * a_x
        + 1j * beta * a_xx
        + 1j * gamma * np.abs(fld.values) ** 2 * fld.values
    )


def solve_nls(
    fld: WavePacketField,
    t_end: float,
    dt: float,
    checkpoints: Sequence[float] | None = None,
) -> WavePacketField | list[WavePacketField]:
    """Strang-split integration of the envelope equation.

    The linear substep (advection plus dispersion) is exact in transform
    space; the cubic substep is exact pointwise because |A| is constant
    along it.  Second-order accurate in dt overall.  With ``checkpoints``
    a list of fields at those times is returned (dt is shrunk per segment
    to land on them exactly).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    c, beta, gamma = envelope_coefficients(fld)
    kappa = 2.0 * np.pi * np.fft.fftfreq(fld.n, d=fld.length / fld.n)
    symbol = -1j * c * kappa - 1j * beta * kappa**2

    def advance(values: np.ndarray, span: float) -> np.ndarray:
        steps = max(1, round(span / dt))
        h = span / steps
        linear = np.exp(symbol * h)
        a = values
        for _ in range(steps):
            a = a * np.exp(0.5j * gamma * h * np.abs(a) ** 2)
            a = np.fft.ifft(linear * np.fft.fft(a))
            a = a * np.exp(0.5j * gamma * h * np.abs(a) ** 2)
        return a

    if checkpoints is None:
        return replace(fld, values=advance(fld.values, t_end))
    out = []
    a = fld.values
    t_prev = 0.0
    for t_next in checkpoints:
        if t_next < t_prev:
            raise ValueError("checkpoints must be nondecreasing")
        if t_next > t_prev:
            a = advance(a, t_next - t_prev)
        out.append(replace(fld, values=a.copy()))
        t_prev = t_next
    return out


def solve_two_wave(
    fld_a: WavePacketField,
    fld_b: WavePacketField,
    t_end: float,
    dt: float,
) -> tuple[WavePacketField, WavePacketField]:
    """Coupled envelopes at a phase-matched carrier (k and 3k).

    Linear transport is exact per wave; the coupled cubic terms are advanced
    by one classical fourth-order Runge-Kutta stage per split step.
    """
    if fld_a.kind != "fourth_order" or fld_b.kind != "fourth_order":
        raise ValueError("the two-wave system is the fourth_order resonant pair")
    d = dispersion(fld_a.kind)
    if abs(phase_match_residual(d, 3, fld_a.k)) >= 1e-6:
        raise ValueError(
            f"carrier k={fld_a.k} is not phase matched: "
            f"omega(3k) - 3 omega(k) = {phase_match_residual(d, 3, fld_a.k):.3e}"
        )
    if abs(fld_b.k - 3.0 * fld_a.k) > 1e-9:
        raise ValueError("second field must ride the third harmonic 3k")
    eps = fld_a.eps
    om1, om1p = dispersion_eval(d, fld_a.k)
    om3, om3p = dispersion_eval(d, 3.0 * fld_a.k)
    kappa = 2.0 * np.pi * np.fft.fftfreq(fld_a.n, d=fld_a.length / fld_a.n)

    def nonlinear(a, b):
        da = eps * (-3.0 * np.abs(a) ** 2 * a - 6.0 * np.abs(b) ** 2 * a
                    - 3.0 * np.conj(a) ** 2 * b) / (2j * om1)
        db = eps * (-3.0 * np.abs(b) ** 2 * b - 6.0 * np.abs(a) ** 2 * b
                    - a**3) / (2j * om3)
        return da, db

    steps = max(1, round(t_end / dt))
    h = t_end / steps
    lin_a = np.exp(-1j * om1p * kappa * 0.5 * h)
    lin_b = np.exp(-1j * om3p * kappa * 0.5 * h)
    a, b = fld_a.values.copy(), fld_b.values.copy()
    for _ in range(steps):
        a = np.fft.ifft(lin_a * np.fft.fft(a))
        b = np.fft.ifft(lin_b * np.fft.fft(b))
        ka1, kb1 = nonlinear(a, b)
        ka2, kb2 = nonlinear(a + 0.5 * h * ka1, b + 0.5 * h * kb1)
        ka3, kb3 = nonlinear(a + 0.5 * h * ka2, b + 0.5 * h * kb2)
        ka4, kb4 = nonlinear(a + h * ka3, b + h * kb3)
        a = a + h / 6.0 * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4)
        b = b + h / 6.0 * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4)
        a = np.fft.ifft(lin_a * np.fft.fft(a))
        b = np.fft.ifft(lin_b * np.fft.fft(b))
    return replace(fld_a, values=a), replace(fld_b, values=b)


# --- reconstruction and comparison ----------------------------------------------

def reconstruct_field(fld: WavePacketField, t: float, order: int) -> RealField:
    """Real field and its exact time derivative from the envelope at time t.

    Order 0 is the bare carrier u = A e^{i theta} + c.c.; order 1 adds the
    quadratic correction eps (2|A|^2 - (1/3) A^2 e^{2 i theta} - c.c.-term),
    which exists for the klein_gordon hierarchy only.  The time derivative
    threads the product rule through the carrier and the envelope equation.
    """
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    if order == 1 and fld.kind != "klein_gordon":
        raise ValueError("the first-order correction is derived for klein_gordon")
    d = dispersion(fld.kind)
    omega, _ = dispersion_eval(d, fld.k)
    a = fld.values
    da = envelope_rhs(fld)
    carrier = np.exp(1j * (fld.k * fld.x - omega * t))
    u = 2.0 * np.real(a * carrier)
    ut = 2.0 * np.real((da - 1j * omega * a) * carrier)
    if order == 1:
        eps = fld.eps
        u = u + eps * (
            2.0 * np.abs(a) ** 2 - (2.0 / 3.0) * np.real(a**2 * carrier**2)
        )
        ut = ut + eps * (
            4.0 * np.real(da * np.conj(a))
            - (2.0 / 3.0) * np.real((2.0 * a * da - 2j * omega * a**2) * carrier**2)
        )
    return RealField(fld.length, u, ut)


def gaussian_packet(
    eps: float,
    k: float,
    amplitude: float = 0.5,
    sigma_wavelengths: float = 10.0,
    t_end: float = 0.0,
    points_per_wavelength: int = 16,
    kind: str = "klein_gordon",
) -> WavePacketField:
    """Gaussian envelope a exp(-(x-x_c)^2 / 2 sigma^2) on a big-enough domain.

    The derivation assumes the envelope varies slowly against the carrier,
    so sigma must be at least 10 carrier wavelengths.  The domain is sized
    so the carrier is an exact grid wavenumber and the packet, moving at
    the group velocity, never wraps within t_end (L >= x_c + |omega'| t_end
    + 6 sigma with x_c = 6 sigma).
    """
    if sigma_wavelengths < 10.0:
        raise ValueError("envelope must span at least 10 carrier wavelengths")
    wavelength = 2.0 * np.pi / k
    sigma = sigma_wavelengths * wavelength
    x_c = 6.0 * sigma
    d = dispersion(kind)
    _, group = dispersion_eval(d, k)
    l_min = x_c + abs(group) * t_end + 6.0 * sigma
    m = int(np.ceil(l_min / wavelength))
    length = m * wavelength
    n = 1 << int(np.ceil(np.log2(points_per_wavelength * m)))
    x = grid_points(length, n)
    values = amplitude * np.exp(-((x - x_c) ** 2) / (2.0 * sigma**2))
    return WavePacketField(length, values, k, eps, kind)


def envelope_centroid(fld: WavePacketField) -> float:
    """First moment of |A|^2, the packet position."""
    weight = np.abs(fld.values) ** 2
    return float(np.sum(fld.x * weight) / np.sum(weight))


def packet_compare(
    eps: float,
    k: float,
    amplitude: float = 0.5,
    sigma_wavelengths: float = 10.0,
    t_end: float | None = None,
    order: int = 1,
    checkpoints: Sequence[float] | None = None,
    dt: float = 0.05,
    rtol: float = 1e-9,
    atol: float = 1e-11,
    kind: str = "klein_gordon",
    points_per_wavelength: int = 16,
    keep_fields: bool = False,
) -> RunReport:
    """Direct solve versus envelope evolution for one Gaussian wave packet.

    The direct solver starts from the order-``order`` reconstruction at t=0;
    both paths then evolve independently and are compared at the checkpoint
    times.  ``l2_error`` is the relative L2 error at the final checkpoint;
    ``error`` holds the per-checkpoint relative L2 errors; ``stats`` records
    the grid, the direct run's energy drift and the envelope's L2 drift
    (plus, with ``keep_fields``, the compared snapshots themselves).
    """
    if t_end is None:
        t_end = 1.0 / eps
    if checkpoints is None:
        checkpoints = [t_end]
    checkpoints = list(checkpoints)
    packet = gaussian_packet(
        eps, k, amplitude, sigma_wavelengths, max(t_end, max(checkpoints)),
        points_per_wavelength, kind,
    )
    u0 = reconstruct_field(packet, 0.0, order)
    direct = _solve_direct(
        eps, u0, max(checkpoints), rtol, kind, checkpoints, atol
    )
    envelopes = solve_nls(packet, max(checkpoints), dt, checkpoints=checkpoints)

    rel_errors = []
    abs_errors = []
    snapshots = []
    for snap, env, t in zip(direct.fields, envelopes, checkpoints):
        rec = reconstruct_field(env, t, order)
        diff = snap.u - rec.u
        rel_errors.append(float(np.linalg.norm(diff) / np.linalg.norm(snap.u)))
        abs_errors.append(float(np.max(np.abs(diff))))
        if keep_fields:
            snapshots.append({"t": t, "direct": snap.u, "reconstructed": rec.u})

    e_start = energy(u0, eps, kind)
    e_end = energy(direct.fields[-1], eps, kind)
    l2_start = float(np.linalg.norm(packet.values))
    l2_end = float(np.linalg.norm(envelopes[-1].values))
    extra = {"fields": {"x": packet.x, "snapshots": snapshots}} if keep_fields else {}
    return RunReport(
        case=f"packet_{kind}",
        eps=eps,
        horizon=float(max(checkpoints)),
        max_abs_error=float(max(abs_errors)),
        l2_error=rel_errors[-1],
        t=np.asarray(checkpoints, dtype=float),
        error=np.asarray([rel_errors]),
        stats={
            "k": k,
            "order": order,
            "amplitude": amplitude,
            "sigma_wavelengths": sigma_wavelengths,
            "grid_n": packet.n,
            "domain_length": packet.length,
            "dt": dt,
            "rtol": rtol,
            "relative_l2_per_checkpoint": rel_errors,
            "energy_drift_rel": abs(e_end - e_start) / max(abs(e_start), 1e-300),
            "envelope_l2_drift_rel": abs(l2_end - l2_start) / l2_start,
            "nfev_direct": direct.meta["nfev"],
            **extra,
        },
    )
