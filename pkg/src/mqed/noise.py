"""Delta-normalized commutator coefficients of the noise polarization
densities and the noise current, plus the t = 0 continuity probe.

The equal-frequency commutator of the noise polarization reduces, after the
reservoir continuum is collapsed onto its radial frequency label (angular
measure 4 pi, radial Jacobian omega^2 / c^3), to

    lhs(omega, k) = (4 pi omega^2 / c^3) sum_nu (f v_nu)(f v_nu)^dag,

which the fluctuation-dissipation relation equates to (hbar eps0 / pi)
Im chi_hat_e (magnetic analog with hbar / (mu0 pi)). The two sides are
computed by disjoint numerical routes: direct coefficient assembly on the
left, the kernel-quadrature + half-line transform pipeline on the right.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .couplings import ELECTRIC, MAGNETIC, eval_coupling_batch
from .errors import ValidationError
from .quadrature import QuadratureSpec, gauss_legendre
from .response import chi_kernel, chi_spectrum
from .tensors import NATURAL, PhysicalConstants, triad


@dataclass(frozen=True)
class CommutatorReport:
    """Computed vs target commutator coefficient tensors on a grid.

    For noise kinds both sides are Hermitian PSD densities of
    delta(omega - omega'); max_rel_err is normalized by the largest target
    tensor on the grid and never clipped.
    """

    kind: str  # noise_P | noise_M | noise_J | field_equal_time
    k: np.ndarray
    grid: np.ndarray
    lhs: np.ndarray  # (n, 3, 3)
    rhs: np.ndarray
    max_rel_err: float
    details: dict = field(default_factory=dict)


def _relative_deviation(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = float(np.max(np.linalg.norm(rhs, axis=(1, 2))))
    if scale == 0.0:
        return float(np.max(np.linalg.norm(lhs, axis=(1, 2))))
    return float(np.max(np.linalg.norm(lhs - rhs, axis=(1, 2)))) / scale


def _default_t_grid(model, tail: float = 1e-9, n_t: int = 1200) -> np.ndarray:
    return np.linspace(0.0, model.suggested_t_max(tail), n_t)


def noise_coefficient_density(model, k, omega_grid, constants: PhysicalConstants):
    """Direct assembly of the noise commutator density from the coupling
    tensors and the polarization triad at k (no susceptibility involved)."""
    omega = np.asarray(omega_grid, dtype=float)
    tr = triad(k)
    f = eval_coupling_batch(model, omega, k)
    vs = [tr.e(1), tr.e(2), tr.v3] if model.which == ELECTRIC else [tr.s(1), tr.s(2), tr.s3]
    acc = np.zeros((omega.size, 3, 3), dtype=complex)
    for v in vs:
        fv = f @ v.astype(complex)  # (n, 3)
        acc += fv[:, :, None] * np.conj(fv)[:, None, :]
    radial = 4.0 * np.pi * omega**2 / constants.c**3
    return radial[:, None, None] * acc


def noise_commutator(
    model,
    which: str,
    k,
    omega_grid,
    constants: PhysicalConstants = NATURAL,
    quad: QuadratureSpec = QuadratureSpec(),
    t_grid=None,
) -> CommutatorReport:
    """Fluctuation-dissipation check for the noise polarization densities.

    which selects the sector: "P" pairs an electric model with
    (hbar eps0 / pi) Im chi_hat_e, "M" a magnetic model with
    (hbar / (mu0 pi)) Im chi_hat_m.
    """
    if which not in ("P", "M"):
        raise ValidationError("which must be 'P' or 'M'")
    expected_sector = ELECTRIC if which == "P" else MAGNETIC
    if model.which != expected_sector:
        raise ValidationError(f"'{which}' commutator needs a {expected_sector} model")
    omega = np.asarray(omega_grid, dtype=float)
    k = np.asarray(k, dtype=float)
    lhs = noise_coefficient_density(model, k, omega, constants)
    if t_grid is None:
        t_grid = _default_t_grid(model)
    kernel = chi_kernel(model, k, t_grid, constants=constants, quad=quad)
    spectrum = chi_spectrum(kernel, omega)
    if which == "P":
        factor = constants.hbar * constants.eps0 / np.pi
    else:
        factor = constants.hbar / (constants.mu0 * np.pi)
    rhs = factor * spectrum.imag_hermitian()
    return CommutatorReport(
        kind="noise_P" if which == "P" else "noise_M",
        k=k,
        grid=omega,
        lhs=lhs,
        rhs=rhs,
        max_rel_err=_relative_deviation(lhs, rhs),
        details={"quadrature": kernel.quad.metadata()},
    )


def noise_current_coefficient(
    model,
    k,
    omega_grid,
    constants: PhysicalConstants = NATURAL,
    quad: QuadratureSpec = QuadratureSpec(),
    t_grid=None,
) -> CommutatorReport:
    """Commutator coefficient of the noise current density.

    The current picks up one power of the reservoir frequency relative to the
    noise polarization, so its coefficient density is omega^2 times the
    polarization one, matching (hbar eps0 / pi) omega^2 Im chi_hat_e.
    """
    if model.which != ELECTRIC:
        raise ValidationError("the noise current pairs with an electric model")
    omega = np.asarray(omega_grid, dtype=float)
    k = np.asarray(k, dtype=float)
    lhs = (omega**2)[:, None, None] * noise_coefficient_density(model, k, omega, constants)
    if t_grid is None:
        t_grid = _default_t_grid(model)
    kernel = chi_kernel(model, k, t_grid, constants=constants, quad=quad)
    spectrum = chi_spectrum(kernel, omega)
    factor = constants.hbar * constants.eps0 / np.pi
    rhs = factor * (omega**2)[:, None, None] * spectrum.imag_hermitian()
    return CommutatorReport(
        kind="noise_J",
        k=k,
        grid=omega,
        lhs=lhs,
        rhs=rhs,
        max_rel_err=_relative_deviation(lhs, rhs),
        details={"quadrature": kernel.quad.metadata()},
    )


@dataclass(frozen=True)
class ContinuityReport:
    dt: float
    jump: float
    peak_rate: float

    @property
    def relative_jump(self) -> float:
        return self.jump / self.peak_rate if self.peak_rate > 0.0 else self.jump


def _gaussian_probe(tau: float):
    return lambda s: np.exp(-((s / tau) ** 2))


def _convolution_at(rep, probe, t: float, order: int = 24) -> np.ndarray:
    """integral_0^t chi(t - s) E(s) ds with the quadrature-representation
    kernel, the inner time integral done by fixed-order Gauss-Legendre."""
    if t == 0.0:
        return np.zeros((3, 3), dtype=complex)
    s, w = gauss_legendre(order, 0.0, t)
    sin_block = np.sin(np.outer(rep.nodes, t - s))  # (n, m)
    weights = sin_block @ (w * probe(s))  # (n,)
    return np.einsum("n,nij->ij", weights, rep.coeffs)


def pdot_continuity(
    model,
    k,
    constants: PhysicalConstants = NATURAL,
    dt: float = 1e-3,
    quad: QuadratureSpec = QuadratureSpec(),
    t_grid=None,
) -> ContinuityReport:
    """Jump of the one-sided limits of dP/dt at t = 0 under a smooth probe.

    The polarization is driven through the two-branch constitutive form (the
    |t| convolution over a Gaussian probe pulse of width 5 / frequency_scale,
    with the negative-time branch reconstructed from the |t| symmetry). The
    kernel vanishing at t = 0+ forces both one-sided limits to zero; the
    estimator uses second-order one-sided stencils and must shrink as dt does.
    """
    k = np.asarray(k, dtype=float)
    dt = float(dt)
    tau = 5.0 / model.frequency_scale
    probe = _gaussian_probe(tau)
    if t_grid is None:
        t_grid = _default_t_grid(model)
    kernel = chi_kernel(model, k, t_grid, constants=constants, quad=quad)
    rep = kernel.rep
    eps0 = constants.eps0 if model.which == ELECTRIC else 1.0

    def p_plus(t):
        return eps0 * _convolution_at(rep, probe, t)

    def p_minus(t):  # P(-t) branch: probe sampled at negative times
        return eps0 * _convolution_at(rep, lambda s: probe(-s), t)

    p0 = p_plus(0.0)
    right = (-3.0 * p0 + 4.0 * p_plus(dt) - p_plus(2.0 * dt)) / (2.0 * dt)
    left = (3.0 * p0 - 4.0 * p_minus(dt) + p_minus(2.0 * dt)) / (2.0 * dt)
    jump = float(np.max(np.abs(right - left)))

    # peak |dP/dt| over the pulse for normalization
    wide = np.linspace(0.0, 4.0 * tau, 801)
    h = wide[1] - wide[0]
    cum_c = np.zeros((rep.nodes.size, wide.size))
    cum_s = np.zeros_like(cum_c)
    ew = probe(wide)
    cosm = np.cos(np.outer(rep.nodes, wide)) * ew[None, :]
    sinm = np.sin(np.outer(rep.nodes, wide)) * ew[None, :]
    cum_c[:, 1:] = np.cumsum(0.5 * h * (cosm[:, 1:] + cosm[:, :-1]), axis=1)
    cum_s[:, 1:] = np.cumsum(0.5 * h * (sinm[:, 1:] + sinm[:, :-1]), axis=1)
    inner = np.sin(np.outer(rep.nodes, wide)) * cum_c - np.cos(np.outer(rep.nodes, wide)) * cum_s
    p_wide = eps0 * np.einsum("nt,nij->tij", inner, rep.coeffs)
    rate = np.abs(np.diff(p_wide, axis=0)) / h
    peak = float(np.max(rate)) if rate.size else 0.0
    return ContinuityReport(dt=dt, jump=jump, peak_rate=peak)
