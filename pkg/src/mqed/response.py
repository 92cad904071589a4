"""Susceptibility kernels, spectra, causality checks and Laplace-domain
material response.

The time-domain memory kernel of an absorbing medium is the half-line sine
transform of the coupling spectral density,

    chi(k, t) = pref * integral_0^inf domega omega^2 sin(omega t) f f^dag,

with pref = 8 pi / (hbar c^3 eps0) for the electric sector and
8 pi mu0 / (hbar c^3) for the magnetic one; chi vanishes identically for
t <= 0. The frequency quadrature representation is kept with the kernel so
the frequency spectrum and Laplace transform can be taken exactly in t.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .couplings import ELECTRIC, MAGNETIC, coupling_product
from .errors import (
    GridTooCoarse,
    LeftHalfPlane,
    NotPSD,
    TailNotDecayed,
    ValidationError,
    ZeroFrequency,
)
from .quadrature import QuadratureResult, QuadratureSpec, adaptive_nodes, trapezoid_weights
from .rational import Rational
from .tensors import IDENTITY3, NATURAL, PhysicalConstants

_SPECTRUM_CHUNK = 512


def kernel_prefactor(which: str, constants: PhysicalConstants) -> float:
    if which == ELECTRIC:
        return 8.0 * np.pi / (constants.hbar * constants.c**3 * constants.eps0)
    if which == MAGNETIC:
        return 8.0 * np.pi * constants.mu0 / (constants.hbar * constants.c**3)
    raise ValidationError(f"unknown sector '{which}'", key="which")


@dataclass(frozen=True)
class QuadRep:
    """Frequency-quadrature representation sum_n c_n sin(omega_n t)."""

    nodes: np.ndarray  # (n,)
    coeffs: np.ndarray  # (n, 3, 3): weight * pref * omega^2 * f f^dag

    def kernel_values(self, t_grid) -> np.ndarray:
        t = np.asarray(t_grid, dtype=float)
        out = np.empty((t.size, 3, 3), dtype=complex)
        for start in range(0, t.size, 4096):
            s = np.sin(np.outer(t[start : start + 4096], self.nodes))
            out[start : start + 4096] = np.einsum("tn,nij->tij", s, self.coeffs)
        return out


@dataclass(frozen=True)
class SusceptibilityKernel:
    which: str
    k: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray  # (n_t, 3, 3)
    quad: QuadratureResult
    rep: QuadRep | None = None
    model_parameters: dict = field(default_factory=dict)

    @property
    def imag_defect(self) -> float:
        return float(np.max(np.abs(self.values.imag))) if self.values.size else 0.0

    def metadata(self) -> dict:
        return {
            "which": self.which,
            "k": [float(x) for x in self.k],
            "t_max": float(self.t_grid[-1]),
            "n_t": int(self.t_grid.size),
            "quadrature": self.quad.metadata(),
            "model": self.model_parameters,
        }


@dataclass(frozen=True)
class ResponseSpectrum:
    which: str
    k: np.ndarray
    omega_grid: np.ndarray
    values: np.ndarray  # (n_omega, 3, 3)
    imag_min_eig: float
    tail_fraction: float
    plateau: np.ndarray | None = None

    def imag_hermitian(self) -> np.ndarray:
        """Hermitian dissipative part (values - values^dag) / 2i per omega."""
        return (self.values - np.conj(np.transpose(self.values, (0, 2, 1)))) / 2.0j

    def real_hermitian(self) -> np.ndarray:
        return (self.values + np.conj(np.transpose(self.values, (0, 2, 1)))) / 2.0


def _validate_t_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValidationError("t_grid must be a 1-d grid with at least two points")
    if t[0] != 0.0:
        raise ValidationError("t_grid must start at 0")
    if np.any(np.diff(t) <= 0.0):
        raise ValidationError("t_grid must be strictly increasing")
    return t


def chi_kernel(
    model,
    k,
    t_grid,
    constants: PhysicalConstants = NATURAL,
    quad: QuadratureSpec = QuadratureSpec(),
) -> SusceptibilityKernel:
    """Time-domain susceptibility kernel chi(k, t) on t_grid (t >= 0).

    The improper frequency integral is truncated at the configured cutoff and
    evaluated by Gauss-Legendre with order doubling until the kernel stops
    moving on the whole grid.
    """
    t = _validate_t_grid(t_grid)
    k = np.asarray(k, dtype=float)
    pref = kernel_prefactor(model.which, constants)
    cutoff = quad.resolve_cutoff(model.frequency_scale)
    hard = model.hard_cutoff
    if hard is not None:
        cutoff = min(cutoff, hard)
    stash = {}

    def evaluate(x, w):
        ff = coupling_product(model, x, k)
        coeffs = (w * pref * x**2)[:, None, None] * ff
        stash["rep"] = QuadRep(nodes=x, coeffs=coeffs)
        return stash["rep"].kernel_values(t)

    values, result = adaptive_nodes(quad, cutoff, evaluate)
    return SusceptibilityKernel(
        which=model.which,
        k=k,
        t_grid=t,
        values=values,
        quad=result,
        rep=stash["rep"],
        model_parameters=model.parameters(),
    )


def _plateau(values: np.ndarray, t_grid: np.ndarray, tail_rtol: float):
    """Estimate the long-time limit from the final 5% of samples and verify
    the kernel has actually settled there.

    A genuine conductor plateau is flat and large compared to the residual
    tail wobble; a slowly decaying tail (e.g. the algebraic tail of the
    Gaussian family) fails the dominance test and is treated as zero."""
    n = values.shape[0]
    m = max(5, n // 20)
    tail = values[-m:]
    plateau = tail.mean(axis=0)
    scale = float(np.max(np.abs(values)))
    if scale == 0.0:
        return np.zeros((3, 3), dtype=complex), 0.0
    wobble = float(np.max(np.abs(tail - plateau))) / scale
    if wobble > tail_rtol:
        raise TailNotDecayed(
            f"kernel tail still moving by {wobble:g} of peak (> {tail_rtol:g}); "
            "extend t_grid or raise tail_rtol"
        )
    top = float(np.max(np.abs(plateau)))
    if top <= tail_rtol * scale or top <= 50.0 * wobble * scale:
        plateau = np.zeros((3, 3), dtype=complex)
    return plateau, wobble


def _half_line_transform_exact(rep: QuadRep, t_max: float, omega: np.ndarray) -> np.ndarray:
    """integral_0^T sin(a t) e^{i omega t} dt summed over the representation.

    Uses (e^{ix} - 1)/(ix) = e^{ix/2} sinc(x / 2 pi) * T, stable for all x.
    """

    def seg(d):  # integral_0^T e^{i d t} dt
        x = d * t_max
        return t_max * np.exp(0.5j * x) * np.sinc(x / (2.0 * np.pi))

    out = np.empty((omega.size, 3, 3), dtype=complex)
    for start in range(0, omega.size, _SPECTRUM_CHUNK):
        w = omega[start : start + _SPECTRUM_CHUNK][:, None]
        it = (seg(w + rep.nodes[None, :]) - seg(w - rep.nodes[None, :])) / 2.0j
        out[start : start + _SPECTRUM_CHUNK] = np.einsum("wn,nij->wij", it, rep.coeffs)
    return out


def chi_spectrum(
    kernel: SusceptibilityKernel,
    omega_grid,
    tail_rtol: float = 1e-6,
    psd_tol: float = 1e-8,
) -> ResponseSpectrum:
    """Half-line frequency transform chi_hat(k, omega) = int_0^inf chi e^{i omega t} dt.

    Conductor-like kernels settle on a nonzero plateau chi(inf); the tail
    integral of the plateau is added analytically (i chi_inf e^{i omega T} /
    omega), which is what makes the free-carrier spectrum converge. The
    dissipative (hermitian-imaginary) part must come out PSD for omega > 0.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or np.any(omega < 0.0):
        raise ValidationError("omega_grid must be 1-d and nonnegative")
    t = kernel.t_grid
    t_max = float(t[-1])
    plateau, wobble = _plateau(kernel.values, t, tail_rtol)
    has_plateau = bool(np.any(plateau != 0.0))
    if has_plateau and np.any(omega == 0.0):
        raise ZeroFrequency("spectrum of a plateau kernel diverges at omega = 0")

    if kernel.rep is not None:
        values = _half_line_transform_exact(kernel.rep, t_max, omega)
    else:
        wt = trapezoid_weights(t)
        phase = np.exp(1j * np.outer(omega, t)) * wt[None, :]
        values = np.einsum("wt,tij->wij", phase, kernel.values)
    if has_plateau:
        fac = 1j * np.exp(1j * omega * t_max) / omega
        values = values + fac[:, None, None] * plateau[None, :, :]

    imh = (values - np.conj(np.transpose(values, (0, 2, 1)))) / 2.0j
    positive = omega > 0.0
    if np.any(positive):
        eigs = np.linalg.eigvalsh(imh[positive])
        min_eig = float(np.min(eigs))
        scale = float(np.max(np.abs(eigs))) or 1.0
        if min_eig < -psd_tol * scale:
            raise NotPSD(f"Im chi_hat has eigenvalue {min_eig:g} below -tol for omega > 0")
    else:
        min_eig = 0.0
    return ResponseSpectrum(
        which=kernel.which,
        k=kernel.k,
        omega_grid=omega,
        values=values,
        imag_min_eig=min_eig,
        tail_fraction=wobble,
        plateau=plateau if has_plateau else None,
    )


@dataclass(frozen=True)
class KKReport:
    max_rel_residual: float
    n_grid: int
    grid_step: float


def kk_check(spectrum: ResponseSpectrum) -> KKReport:
    """Kramers-Kronig residual of a spectrum on a uniform omega grid.

    Reconstructs Re chi_hat from Im chi_hat entrywise through the half-line
    (even-extension) dispersion integral

        Re chi(w) = (2/pi) P int_0^inf w' Im chi(w') / (w'^2 - w^2) dw',

    with the principal value handled by evaluating at midpoints so the
    singular node is straddled symmetrically (O(h^2)). Reports the max
    relative deviation from the directly computed real part; an acausal
    spectrum shows up as an O(1) residual, not an exception.
    """
    omega = spectrum.omega_grid
    if omega.size < 64:
        raise GridTooCoarse("kk_check needs at least 64 grid points")
    h = np.diff(omega)
    if np.max(np.abs(h - h[0])) > 1e-9 * max(abs(h[0]), 1e-30):
        raise GridTooCoarse("kk_check needs a uniform omega grid")
    h = float(h[0])
    im = spectrum.imag_hermitian()
    re = spectrum.real_hermitian()
    mid = 0.5 * (omega[:-1] + omega[1:])
    re_direct = 0.5 * (re[:-1] + re[1:])
    re_kk = np.empty_like(re_direct)
    wj2 = omega**2
    for start in range(0, mid.size, _SPECTRUM_CHUNK):
        m = mid[start : start + _SPECTRUM_CHUNK]
        wmat = (2.0 / np.pi) * h * omega[None, :] / (wj2[None, :] - (m**2)[:, None])
        re_kk[start : start + _SPECTRUM_CHUNK] = np.einsum("mw,wij->mij", wmat, im)
    scale = float(np.max(np.linalg.norm(re_direct, axis=(1, 2))))
    if scale == 0.0:
        return KKReport(max_rel_residual=0.0, n_grid=int(omega.size), grid_step=h)
    resid = float(np.max(np.linalg.norm(re_kk - re_direct, axis=(1, 2)))) / scale
    return KKReport(max_rel_residual=resid, n_grid=int(omega.size), grid_step=h)


def chi_hat_rational(model) -> Rational:
    """chi_hat(rho) for the rational (damped-oscillator family) kinds."""
    if hasattr(model, "chi_rational"):
        return model.chi_rational()
    base = getattr(model, "base", model)
    if not base.is_rational:
        raise ValidationError(f"model kind '{base.kind}' has no rational transform")
    if base.is_zero:
        return Rational.constant(0.0)
    return Rational.make(
        [base.strength**2], [base.resonance**2, base.width, 1.0]
    )


@dataclass(frozen=True)
class LaplaceResponse:
    """Laplace-domain permittivity/permeability (and optional conductivity).

    eps_hat = eps0 (1 + chi_hat_e), mu_hat = mu0 (1 + chi_hat_m), evaluated
    for Re rho > 0. Rational models use the closed form; everything else goes
    through the kernel quadrature representation, for which the transform of
    each sine mode is omega_n / (rho^2 + omega_n^2) exactly.
    """

    model_e: object
    model_m: object
    constants: PhysicalConstants
    quad: QuadratureSpec
    sigma_evaluator: object = None  # callable (k, rho) -> 3x3, or None
    _rep_cache: dict = field(default_factory=dict, repr=False)

    @property
    def is_rational(self) -> bool:
        ok = self.model_e.is_rational and self.model_m.is_rational
        return ok and (self.sigma_evaluator is None or getattr(self.sigma_evaluator, "is_rational", False))

    def _check_rho(self, rho, continued=False):
        if continued:
            return
        if np.any(np.real(np.atleast_1d(rho)) <= 0.0):
            raise LeftHalfPlane("material response requires Re rho > 0")

    def _chi_numeric(self, model, k, rho):
        key = (id(model), model.which, tuple(np.asarray(k, dtype=float)))
        rep = self._rep_cache.get(key)
        if rep is None:
            pref = kernel_prefactor(model.which, self.constants)
            cutoff = self.quad.resolve_cutoff(model.frequency_scale)
            if model.hard_cutoff is not None:
                cutoff = min(cutoff, model.hard_cutoff)
            probe = np.array([0.37, 1.1, 3.3]) * model.frequency_scale

            def evaluate(x, w):
                ff = coupling_product(model, x, np.asarray(k, dtype=float))
                coeffs = (w * pref * x**2)[:, None, None] * ff
                stashed["rep"] = QuadRep(nodes=x, coeffs=coeffs)
                frac = x[None, :] / (probe[:, None] ** 2 + x[None, :] ** 2)
                return np.einsum("pn,nij->pij", frac, coeffs)

            stashed = {}
            adaptive_nodes(self.quad, cutoff, evaluate)
            rep = stashed["rep"]
            self._rep_cache[key] = rep
        rho = np.atleast_1d(np.asarray(rho, dtype=complex))
        frac = rep.nodes[None, :] / (rho[:, None] ** 2 + rep.nodes[None, :] ** 2)
        out = np.einsum("pn,nij->pij", frac, rep.coeffs)
        return out

    def chi(self, model, k, rho, continued=False) -> np.ndarray:
        """chi_hat(k, rho). With continued=True a rational model is evaluated
        by analytic continuation anywhere off its poles (contour methods need
        this); continuum-absorption models have a branch cut on the imaginary
        axis and refuse to continue."""
        scalar = np.isscalar(rho) or np.asarray(rho).ndim == 0
        if model.is_zero:
            shape = (1, 3, 3) if scalar else (np.asarray(rho).size, 3, 3)
            out = np.zeros(shape, dtype=complex)
        elif model.is_rational:
            rat = chi_hat_rational(model)
            vals = rat(np.atleast_1d(np.asarray(rho, dtype=complex)))
            out = vals[:, None, None] * IDENTITY3[None, :, :].astype(complex)
        else:
            if continued:
                raise ValidationError(
                    "continuum-absorption response cannot be continued across "
                    "its imaginary-axis branch cut"
                )
            self._check_rho(rho)
            out = self._chi_numeric(model, k, rho)
        if not continued:
            self._check_rho(rho)
        return out[0] if scalar else out

    def axis_chi(self, model, k, omega) -> np.ndarray:
        """Boundary value chi_hat(k, rho -> -i omega + 0): the physical
        spectrum at real frequency, where the quadrature-node sum would be
        principal-value singular. Rational models continue analytically;
        numeric models go through the finite-horizon exact transform."""
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if model.is_zero:
            return np.zeros((omega.size, 3, 3), dtype=complex)
        if model.is_rational:
            rat = chi_hat_rational(model)
            vals = rat(-1j * omega.astype(complex))
            return vals[:, None, None] * IDENTITY3[None, :, :].astype(complex)
        key = ("axis", id(model), tuple(np.asarray(k, dtype=float)))
        cached = self._rep_cache.get(key)
        if cached is None:
            t_grid = np.linspace(0.0, model.suggested_t_max(1e-9), 1400)
            kernel = chi_kernel(model, k, t_grid, constants=self.constants, quad=self.quad)
            self._rep_cache[key] = kernel
            cached = kernel
        return chi_spectrum(cached, omega).values

    def axis_eps(self, k, omega) -> np.ndarray:
        return self.constants.eps0 * (IDENTITY3 + self.axis_chi(self.model_e, k, omega))

    def axis_mu(self, k, omega) -> np.ndarray:
        return self.constants.mu0 * (IDENTITY3 + self.axis_chi(self.model_m, k, omega))

    def axis_sigma(self, k, omega) -> np.ndarray:
        omega = np.atleast_1d(np.asarray(omega, dtype=float))
        if self.sigma_evaluator is None:
            return np.zeros((omega.size, 3, 3), dtype=complex)
        return self.sigma_evaluator.axis(k, omega)

    def eps(self, k, rho, continued=False) -> np.ndarray:
        return self.constants.eps0 * (IDENTITY3 + self.chi(self.model_e, k, rho, continued))

    def mu(self, k, rho, continued=False) -> np.ndarray:
        return self.constants.mu0 * (IDENTITY3 + self.chi(self.model_m, k, rho, continued))

    def sigma(self, k, rho, continued=False) -> np.ndarray:
        if self.sigma_evaluator is None:
            return np.zeros((3, 3), dtype=complex)
        return self.sigma_evaluator(k, rho, continued=continued)

    def rational_scalars(self, k=None):
        """Scalar Rational pieces (eps_hat, mu_hat, sigma_hat) for the exact
        inverse-transform path. Requires rational isotropic models."""
        if not self.is_rational:
            raise ValidationError("laplace response is not rational; use the talbot path")
        eps_rat = (chi_hat_rational(self.model_e) + 1.0) * self.constants.eps0
        mu_rat = (chi_hat_rational(self.model_m) + 1.0) * self.constants.mu0
        if self.sigma_evaluator is None:
            sigma_rat = Rational.constant(0.0)
        else:
            sigma_rat = self.sigma_evaluator.as_rational()
        return eps_rat, mu_rat, sigma_rat


def laplace_response(
    model_e,
    model_m,
    sigma_evaluator=None,
    constants: PhysicalConstants = NATURAL,
    quad: QuadratureSpec = QuadratureSpec(),
) -> LaplaceResponse:
    return LaplaceResponse(
        model_e=model_e,
        model_m=model_m,
        constants=constants,
        quad=quad,
        sigma_evaluator=sigma_evaluator,
    )


@dataclass(frozen=True)
class QKernelReport:
    """Linear-response kernel Q and its susceptibility-derivative split."""

    k: np.ndarray
    t_grid: np.ndarray
    q_values: np.ndarray  # (n_t, 3, 3)
    chi_values: np.ndarray
    implied_sigma: np.ndarray  # Q - eps0 d(chi)/dt by finite differences
    quad: QuadratureResult

    @property
    def sigma_residual(self) -> float:
        scale = float(np.max(np.abs(self.q_values)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.implied_sigma))) / scale


def finite_difference_time(values: np.ndarray, t_grid: np.ndarray) -> np.ndarray:
    """d/dt on a uniform grid: central interior, one-sided second order at
    the ends (the t = 0 end never reaches into t < 0)."""
    t = np.asarray(t_grid, dtype=float)
    h = t[1] - t[0]
    if np.max(np.abs(np.diff(t) - h)) > 1e-9 * h:
        raise ValidationError("finite differences need a uniform t_grid")
    out = np.empty_like(values)
    out[1:-1] = (values[2:] - values[:-2]) / (2.0 * h)
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
    out[-1] = (3.0 * values[-1] - 4.0 * values[-2] + values[-3]) / (2.0 * h)
    return out


def conductor_Q(
    model,
    k,
    t_grid,
    constants: PhysicalConstants = NATURAL,
    quad: QuadratureSpec = QuadratureSpec(),
) -> QKernelReport:
    """Cosine-kernel linear-response tensor

        Q(k, t) = (8 pi / hbar c^3) int_0^inf domega omega^3 cos(omega t) f f^dag

    together with the decomposition check Q - eps0 * d(chi)/dt, whose residual
    is the implied conductivity kernel sigma(k, t).
    """
    t = _validate_t_grid(t_grid)
    k = np.asarray(k, dtype=float)
    pref_q = 8.0 * np.pi / (constants.hbar * constants.c**3)
    pref_chi = kernel_prefactor(ELECTRIC, constants)
    cutoff = quad.resolve_cutoff(model.frequency_scale)
    if model.hard_cutoff is not None:
        cutoff = min(cutoff, model.hard_cutoff)
    stash = {}

    def evaluate(x, w):
        ff = coupling_product(model, x, k)
        cq = (w * pref_q * x**3)[:, None, None] * ff
        cc = (w * pref_chi * x**2)[:, None, None] * ff
        chi_vals = np.empty((t.size, 3, 3), dtype=complex)
        q_vals = np.empty((t.size, 3, 3), dtype=complex)
        for start in range(0, t.size, 4096):
            block = np.outer(t[start : start + 4096], x)
            chi_vals[start : start + 4096] = np.einsum("tn,nij->tij", np.sin(block), cc)
            q_vals[start : start + 4096] = np.einsum("tn,nij->tij", np.cos(block), cq)
        stash["chi"] = chi_vals
        return q_vals

    q_values, result = adaptive_nodes(quad, cutoff, evaluate)
    chi_values = stash["chi"]
    dchi = finite_difference_time(chi_values, t)
    implied_sigma = q_values - constants.eps0 * dchi
    return QKernelReport(
        k=k,
        t_grid=t,
        q_values=q_values,
        chi_values=chi_values,
        implied_sigma=implied_sigma,
        quad=result,
    )
