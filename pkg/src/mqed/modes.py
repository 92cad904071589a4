"""The 6x6 Laplace-domain constitutive/Maxwell system and the
mode-coefficient tensors of the field operators.

Lambda(k, rho) stacks the curl symbol against the rho-weighted material
tensors,

    Lambda = [[O(k), -rho mu_hat], [rho eps_hat (+ sigma_hat), O(k)]],

and its inverse, pushed through the inverse Laplace transform, yields the
coefficient tensors gamma, xi, zeta, eta (electric rows) and their tilde
partners (magnetic rows):

    gamma_ij   = L^-1[ (Lambda^-1)_{i, j+3} ]
    xi_ij      = -L^-1[ (Lambda^-1)_{i, j} ]
    zeta_ij    = mu0 L^-1[ rho/(rho + i w_q) (Lambda^-1)_{i, l} g_lj ]
    eta_ij     = -L^-1[ rho/(rho + i w_q) (Lambda^-1)_{i, l+3} f_lj ]

with rows i+3 for the tilde set. Three inverse-transform methods are
provided: exact partial fractions for rational (isotropic damped-oscillator)
media, a deformed cotangent contour that cross-checks them, and a
vacuum-subtracted Bromwich line for continuum-absorption media whose
imaginary-axis branch cut blocks contour deformation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .couplings import eval_coupling_batch
from .errors import (
    LeftHalfPlane,
    PoleFindingFailed,
    SingularLambda,
    TalbotNotConverged,
    ValidationError,
)
from .rational import Rational, ilt_rational, partial_fractions
from .response import LaplaceResponse
from .tensors import (
    NATURAL,
    PhysicalConstants,
    blocks_to_matrix6,
    curl_symbol,
    longitudinal_projector,
    reciprocal_condition,
    transverse_projector,
)

MARGINAL_POLE_TOL = 1e-12


@dataclass(frozen=True)
class LambdaMatrix:
    k: np.ndarray
    rho: complex
    value: np.ndarray  # (6, 6)
    conductor: bool = False


@dataclass(frozen=True)
class InverseLaplaceSpec:
    """Numerical controls for the inverse Laplace transform.

    method "rational_exact" needs a rational transform and is exact up to
    pole finding; "talbot" deforms the contour into the left half-plane and
    therefore also needs an analytically continuable (rational) response;
    "bromwich_line" integrates along Re rho = const with the vacuum part
    split off exactly, and is the generic path for continuum-absorption
    media (whose branch cut blocks contour deformation). "auto" picks
    rational_exact when possible, bromwich_line otherwise.
    """

    method: str = "auto"
    talbot_start_n: int = 24
    talbot_max_n: int = 2048
    talbot_rtol: float = 1e-9
    pole_tol: float = 1e-7
    limit_rho: float = 1e8
    line_abscissa_factor: float = 3.0
    line_halfwidth_factor: float = 160.0
    line_rtol: float = 1e-4

    def __post_init__(self):
        if self.method not in ("auto", "talbot", "rational_exact", "bromwich_line"):
            raise ValidationError(f"unknown inverse-laplace method '{self.method}'")
        if self.talbot_start_n < 16:
            raise ValidationError("talbot needs at least 16 nodes")


def assemble_lambda(
    response: LaplaceResponse,
    k,
    rho,
    conductor: bool = False,
    continued: bool = False,
    curl_sign: int = +1,
) -> LambdaMatrix:
    """Build Lambda(k, rho); the conductor variant adds sigma_hat to the
    rho eps_hat block.

    continued=True allows Re rho <= 0 through analytic continuation, which
    only rational responses support (contour transforms use it internally).
    curl_sign flips the curl blocks (Lambda(-k, rho) for even media): the
    mode solver uses -1 internally, the one reading of the block system that
    reproduces the initial-data expansions with forward-evolving phases and
    conserves the equal-time commutators (see mode_coefficients).
    """
    if not continued and np.real(rho) <= 0.0:
        raise LeftHalfPlane(f"Lambda requires Re rho > 0, got {rho}")
    k = np.asarray(k, dtype=float)
    rho = complex(rho)
    o = curl_sign * curl_symbol(k)
    lower_left = rho * response.eps(k, rho, continued=continued)
    if conductor:
        lower_left = lower_left + response.sigma(k, rho, continued=continued)
    value = blocks_to_matrix6(o, -rho * response.mu(k, rho, continued=continued), lower_left, o)
    return LambdaMatrix(k=k, rho=rho, value=value, conductor=conductor)


def invert_lambda(lam: LambdaMatrix, rcond_min: float = 1e-12) -> np.ndarray:
    """Inverse of Lambda with a reciprocal-condition guard.

    Singular inversions happen on the imaginary-rho dispersion shell; callers
    must keep the contour off the imaginary axis.
    """
    rc = reciprocal_condition(lam.value)
    if rc < rcond_min:
        raise SingularLambda(
            f"Lambda reciprocal condition {rc:.3e} below {rcond_min:g} at rho={lam.rho}",
            k=lam.k,
            rho=lam.rho,
        )
    return np.linalg.inv(lam.value)


# cotangent-contour parameters tuned for the midpoint rule; exp(rho t) stays
# bounded by exp(0.18 n) along the contour, so node doubling does not blow up
# in double precision the way the classic r = 2n/(5t) scaling does
_TALBOT_SIGMA = 0.6122
_TALBOT_MU = 0.5017
_TALBOT_ALPHA = 0.6407
_TALBOT_NU = 0.2645


def _talbot_nodes(t: float, n: int):
    """Two-sided deformed-contour nodes and quadrature weights.

    The midpoint discretization over theta in (-pi, pi) keeps both contour
    halves without assuming the transform is real-valued (the reservoir
    factors rho/(rho + i w_q) are not). Poles must lie left of the contour,
    which crosses the imaginary axis near +-0.33 n / t."""
    if n % 2:
        n += 1
    if 0.18 * n > 700.0:
        raise TalbotNotConverged("node count beyond double-precision contour range")
    theta = -np.pi + (np.arange(n) + 0.5) * (2.0 * np.pi / n)
    s = n / t
    at = _TALBOT_ALPHA * theta
    cot = np.cos(at) / np.sin(at)
    rho = s * (-_TALBOT_SIGMA + _TALBOT_MU * theta * cot + 1j * _TALBOT_NU * theta)
    drho = s * (
        _TALBOT_MU * cot
        - _TALBOT_MU * _TALBOT_ALPHA * theta / np.sin(at) ** 2
        + 1j * _TALBOT_NU
    )
    weights = np.exp(rho * t) * drho / (1j * n)
    return rho, weights


def talbot_axis_reach(t: float, n: int) -> float:
    """Largest |Im pole| the n-node contour encloses at time t."""
    return 0.33 * n / t


def talbot_transform(evaluator, t: float, n: int) -> np.ndarray:
    rho, w = _talbot_nodes(t, n)
    vals = np.asarray([evaluator(r) for r in rho])
    return np.tensordot(w, vals, axes=(0, 0))


def _limit_value(evaluator, limit_rho: float):
    """t -> 0+ value through the initial-value theorem: rho F(rho) at two
    large real rho, Richardson-extrapolated against the 1/rho correction."""
    g1 = limit_rho * np.asarray(evaluator(limit_rho + 0.0j))
    g2 = 2.0 * limit_rho * np.asarray(evaluator(2.0 * limit_rho + 0.0j))
    return 2.0 * g2 - g1


def inverse_laplace(f, t_grid, spec: InverseLaplaceSpec = InverseLaplaceSpec()):
    """Inverse Laplace transform of a scalar function on a t >= 0 grid.

    rational_exact expects a Rational and is exact up to pole finding;
    talbot doubles the node count until the whole grid settles. Values at
    t = 0 use the initial-value limit for the talbot path.
    """
    t = np.asarray(t_grid, dtype=float)
    if np.any(t < 0.0):
        raise ValidationError("inverse transform defined for t >= 0 only")
    if spec.method == "rational_exact":
        if not isinstance(f, Rational):
            raise PoleFindingFailed("rational_exact requires a Rational input")
        values, _, _ = ilt_rational(f, t, pole_tol=spec.pole_tol)
        return values
    evaluator = f if callable(f) else (lambda rho: f(rho))
    out = np.empty(t.shape, dtype=complex)
    positive = t > 0.0
    if np.any(~positive):
        out[~positive] = _limit_value(evaluator, spec.limit_rho)
    if np.any(positive):
        tp = t[positive]
        n = max(spec.talbot_start_n, 24)
        best = np.inf
        while n <= spec.talbot_max_n:
            # paired evaluation: n and n+16 sit at a similar round-off floor,
            # so their difference is an honest error estimate even past the
            # accuracy optimum (where plain doubling misleads)
            vals = np.array([talbot_transform(evaluator, ti, n) for ti in tp])
            check = np.array([talbot_transform(evaluator, ti, n + 16) for ti in tp])
            scale = float(np.max(np.abs(check))) or 1.0
            diff = float(np.max(np.abs(vals - check)))
            if diff <= spec.talbot_rtol * scale:
                out[positive] = check
                return out
            if diff > 4.0 * best and best < 1e-3 * scale:
                break  # round-off floor passed; more nodes only hurt
            best = min(best, diff)
            n = int(np.ceil(n * 1.4))
        raise TalbotNotConverged(
            f"talbot error estimate stalled at {best:g} (rtol {spec.talbot_rtol:g}); "
            "transform may be non-decaying or have poles outside the contour"
        )
    return out


@dataclass(frozen=True)
class ModeCoefficients:
    """gamma/xi/zeta/eta (electric rows) and tilde partners (magnetic rows)
    on the (t, reservoir frequency) grids, plus the coupling tensors at the
    reservoir nodes that the field assembly contracts against."""

    k: np.ndarray
    t_grid: np.ndarray
    omega_q_grid: np.ndarray
    gamma: np.ndarray  # (n_t, 3, 3)
    xi: np.ndarray
    gamma_tilde: np.ndarray
    xi_tilde: np.ndarray
    zeta: np.ndarray  # (n_q, n_t, 3, 3)
    eta: np.ndarray
    zeta_tilde: np.ndarray
    eta_tilde: np.ndarray
    f_q: np.ndarray  # (n_q, 3, 3) electric coupling at (omega_q, k)
    g_q: np.ndarray
    metadata: dict = field(default_factory=dict)

    def tensors(self) -> dict:
        return {
            "gamma": self.gamma,
            "xi": self.xi,
            "gamma_tilde": self.gamma_tilde,
            "xi_tilde": self.xi_tilde,
            "zeta": self.zeta,
            "eta": self.eta,
            "zeta_tilde": self.zeta_tilde,
            "eta_tilde": self.eta_tilde,
        }


def _scalar_rationals(response: LaplaceResponse, k: np.ndarray):
    """Scalar transverse/longitudinal pieces of Lambda^-1 for isotropic
    rational media. Returns (t_eh, t_ee, l_e, t_he, l_h) with
    D_T = k^2 + rho mu_hat (rho eps_hat + sigma_hat)."""
    eps_rat, mu_rat, sigma_rat = response.rational_scalars(k)
    rho = Rational.variable()
    a_rat = rho * eps_rat + sigma_rat
    d_t = (rho * mu_rat) * a_rat + float(k @ k)
    t_eh = (rho * mu_rat) / d_t
    t_ee = Rational.constant(1.0) / d_t
    l_e = Rational.constant(1.0) / a_rat
    t_he = a_rat / d_t
    l_h = Rational.constant(1.0) / (rho * mu_rat)
    return t_eh, t_ee, l_e, t_he, l_h


def _pole_flags(poles: np.ndarray) -> dict:
    re = np.real(poles)
    return {
        "n_poles": int(poles.size),
        "max_re_pole": float(np.max(re)) if poles.size else 0.0,
        "marginal_poles": int(np.sum(np.abs(re) <= MARGINAL_POLE_TOL)),
        "unstable_poles": int(np.sum(re > MARGINAL_POLE_TOL)),
    }


def _ilt_with_reservoir(rat: Rational, omega_q: np.ndarray, t: np.ndarray, pole_tol: float):
    """L^-1[rho/(rho + i w_q) * rat] for every reservoir frequency at once.

    The base poles are shared; only the extra pole at -i w_q and the residue
    weights depend on w_q, so the expansion vectorizes over the grid."""
    if rat.is_zero or omega_q.size == 0:
        return np.zeros((omega_q.size, t.size), dtype=complex)
    poles, _ = partial_fractions(rat, pole_tol)
    num = rat.num
    den = rat.den
    from numpy.polynomial import polynomial as P

    dden = P.polyder(den)
    extra = -1j * omega_q  # (n_q,)
    if poles.size:
        dist = np.abs(extra[:, None] - poles[None, :])
        if float(np.min(dist)) < pole_tol * max(1.0, float(np.max(np.abs(poles)))):
            raise PoleFindingFailed("reservoir pole collides with a medium pole")
        # residue of rho/(rho+iw) rat at base pole p: p num(p) / ((p+iw) den'(p))
        pn = P.polyval(poles, num) * poles / P.polyval(poles, dden)  # (n_p,)
        res_base = pn[None, :] / (poles[None, :] - extra[:, None])  # (n_q, n_p)
    else:
        res_base = np.zeros((omega_q.size, 0), dtype=complex)
    # residue at rho = -i w_q: (-i w) num(-i w) / den(-i w)
    res_extra = extra * P.polyval(extra, num) / P.polyval(extra, den)  # (n_q,)
    exp_base = np.exp(np.outer(poles, t))  # (n_p, n_t)
    exp_extra = np.exp(np.outer(extra, t))  # (n_q, n_t)
    out = res_base @ exp_base + res_extra[:, None] * exp_extra
    return out


def _rational_mode_path(response, model_f, model_g, k, t, omega_q, spec, constants):
    p_t = transverse_projector(k).astype(complex)
    p_l = longitudinal_projector(k).astype(complex)
    o = -curl_symbol(k)  # the commutator-conserving curl-block orientation
    t_eh, t_ee, l_e, t_he, l_h = _scalar_rationals(response, k)
    mu0 = constants.mu0

    ilt = {}
    all_poles = []
    for name, rat in (("t_eh", t_eh), ("t_ee", t_ee), ("l_e", l_e), ("t_he", t_he), ("l_h", l_h)):
        values, poles, _ = ilt_rational(rat, t, pole_tol=spec.pole_tol)
        ilt[name] = values
        all_poles.append(poles)
    gamma = ilt["t_eh"][:, None, None] * p_t + ilt["l_e"][:, None, None] * p_l
    xi = -ilt["t_ee"][:, None, None] * o
    gamma_t = ilt["t_ee"][:, None, None] * o
    xi_t = ilt["t_he"][:, None, None] * p_t + ilt["l_h"][:, None, None] * p_l

    f_q = eval_coupling_batch(model_f, omega_q, k) if omega_q.size else np.zeros((0, 3, 3), complex)
    g_q = eval_coupling_batch(model_g, omega_q, k) if omega_q.size else np.zeros((0, 3, 3), complex)
    shape = (omega_q.size, t.size, 3, 3)
    zeta = np.zeros(shape, dtype=complex)
    eta = np.zeros(shape, dtype=complex)
    zeta_t = np.zeros(shape, dtype=complex)
    eta_t = np.zeros(shape, dtype=complex)
    if omega_q.size:
        if not model_g.is_zero:
            w_ee = _ilt_with_reservoir(t_ee, omega_q, t, spec.pole_tol)
            zeta = mu0 * np.einsum("qt,ab,qbc->qtac", w_ee, o, g_q)
            w_he = _ilt_with_reservoir(t_he, omega_q, t, spec.pole_tol)
            w_lh = _ilt_with_reservoir(l_h, omega_q, t, spec.pole_tol)
            zeta_t = -mu0 * (
                np.einsum("qt,ab,qbc->qtac", w_he, p_t, g_q)
                + np.einsum("qt,ab,qbc->qtac", w_lh, p_l, g_q)
            )
        if not model_f.is_zero:
            w_eh = _ilt_with_reservoir(t_eh, omega_q, t, spec.pole_tol)
            w_le = _ilt_with_reservoir(l_e, omega_q, t, spec.pole_tol)
            eta = -(
                np.einsum("qt,ab,qbc->qtac", w_eh, p_t, f_q)
                + np.einsum("qt,ab,qbc->qtac", w_le, p_l, f_q)
            )
            w_ee_f = _ilt_with_reservoir(t_ee, omega_q, t, spec.pole_tol)
            eta_t = -np.einsum("qt,ab,qbc->qtac", w_ee_f, o, f_q)
    poles = np.concatenate(all_poles) if all_poles else np.zeros(0, complex)
    meta = {"method": "rational_exact", **_pole_flags(poles)}
    return gamma, xi, gamma_t, xi_t, zeta, eta, zeta_t, eta_t, f_q, g_q, meta


def _axis_lambda_inverse(response, k, omega_q, conductor):
    """Lambda^-1 on the imaginary axis boundary rho = -i w_q (the reservoir
    resonance points), via the physical spectrum values of the material
    tensors. Absorbing media keep Lambda invertible there."""
    o = -curl_symbol(k)
    eps_ax = response.axis_eps(k, omega_q)
    mu_ax = response.axis_mu(k, omega_q)
    rho = -1j * omega_q
    lower = rho[:, None, None] * eps_ax
    if conductor:
        lower = lower + response.axis_sigma(k, omega_q)
    lam = np.empty((omega_q.size, 6, 6), dtype=complex)
    lam[:, :3, :3] = o
    lam[:, :3, 3:] = -rho[:, None, None] * mu_ax
    lam[:, 3:, :3] = lower
    lam[:, 3:, 3:] = o
    for i in range(omega_q.size):
        if reciprocal_condition(lam[i]) < 1e-12:
            raise SingularLambda(
                "Lambda singular on the axis at a reservoir node",
                k=k,
                rho=complex(rho[i]),
            )
    return np.linalg.inv(lam)


def _talbot_mode_path(response, model_f, model_g, k, t, omega_q, spec, constants, conductor):
    """Contour inversion with the reservoir oscillation split off exactly.

    The factor rho/(rho + i w_q) carries a pole at -i w_q that can sit far
    up the imaginary axis, where no contour reaches at large w_q t. Writing

      L^-1[fac G] = g(t) - i w_q ( L^-1[(G - G_ax)/(rho + i w_q)] + G_ax e^{-i w_q t} )

    with G_ax = G(-i w_q) removes that pole from the contour integrand (the
    subtracted numerator vanishes there), leaving only medium-scale poles."""
    mu0 = constants.mu0
    f_q = eval_coupling_batch(model_f, omega_q, k) if omega_q.size else np.zeros((0, 3, 3), complex)
    g_q = eval_coupling_batch(model_g, omega_q, k) if omega_q.size else np.zeros((0, 3, 3), complex)
    n_t = t.size
    n_q = omega_q.size
    need_f = n_q > 0 and not model_f.is_zero
    need_g = n_q > 0 and not model_g.is_zero
    gamma = np.empty((n_t, 3, 3), dtype=complex)
    xi = np.empty_like(gamma)
    gamma_t = np.empty_like(gamma)
    xi_t = np.empty_like(gamma)
    zeta = np.zeros((n_q, n_t, 3, 3), dtype=complex)
    eta = np.zeros_like(zeta)
    zeta_t = np.zeros_like(zeta)
    eta_t = np.zeros_like(zeta)
    rcond_worst = 1.0

    inv_ax = None
    if need_f or need_g:
        inv_ax = _axis_lambda_inverse(response, k, omega_q, conductor)

    def lam_inv(rho):
        nonlocal rcond_worst
        lam = assemble_lambda(response, k, rho, conductor=conductor, continued=True, curl_sign=-1)
        rcond_worst = min(rcond_worst, reciprocal_condition(lam.value))
        return invert_lambda(lam)

    def eval_all(ti, n):
        rho_nodes, w_nodes = _talbot_nodes(ti, n)
        inv = np.stack([lam_inv(r) for r in rho_nodes])  # (n, 6, 6)
        base = (
            np.einsum("n,nab->ab", w_nodes, inv[:, :3, 3:]),
            -np.einsum("n,nab->ab", w_nodes, inv[:, :3, :3]),
            np.einsum("n,nab->ab", w_nodes, inv[:, 3:, 3:]),
            -np.einsum("n,nab->ab", w_nodes, inv[:, 3:, :3]),
        )
        convs = {}
        if inv_ax is not None:
            denom = rho_nodes[None, :] + 1j * omega_q[:, None]  # (q, n)
            cw = w_nodes[None, :] / denom
            for name, sl in (("ee", (slice(0, 3), slice(0, 3))),
                             ("eh", (slice(0, 3), slice(3, 6))),
                             ("he", (slice(3, 6), slice(0, 3))),
                             ("hh", (slice(3, 6), slice(3, 6)))):
                blocks = inv[:, sl[0], sl[1]]  # (n, 3, 3)
                ax = inv_ax[:, sl[0], sl[1]]  # (q, 3, 3)
                convs[name] = np.einsum("qn,nab->qab", cw, blocks) - np.einsum(
                    "qn,qab->qab", cw, ax
                )
        return base, convs

    for it, ti in enumerate(t):
        if ti == 0.0:
            big = spec.limit_rho

            def stacked(rho):
                inv = lam_inv(rho)
                parts = [inv[:3, 3:], -inv[:3, :3], inv[3:, 3:], -inv[3:, :3]]
                if n_q:
                    fac = rho / (rho + 1j * omega_q)  # (q,)
                    parts.append(mu0 * fac[:, None, None] * (inv[:3, :3] @ g_q))
                    parts.append(-fac[:, None, None] * (inv[:3, 3:] @ f_q))
                    parts.append(mu0 * fac[:, None, None] * (inv[3:, :3] @ g_q))
                    parts.append(-fac[:, None, None] * (inv[3:, 3:] @ f_q))
                return parts

            p1 = stacked(big + 0.0j)
            p2 = stacked(2.0 * big + 0.0j)
            lim = [2.0 * (2.0 * big) * b - big * a for a, b in zip(p1, p2)]
            gamma[it], xi[it], gamma_t[it], xi_t[it] = lim[:4]
            if n_q:
                zeta[:, it], eta[:, it], zeta_t[:, it], eta_t[:, it] = lim[4:]
            continue

        n = max(spec.talbot_start_n, 24)
        got = None
        best = np.inf
        while n <= spec.talbot_max_n:
            a_base, a_convs = eval_all(ti, n)
            b_base, b_convs = eval_all(ti, n + 16)
            flat_a = np.concatenate([np.ravel(x) for x in a_base]
                                    + [np.ravel(v) for v in a_convs.values()])
            flat_b = np.concatenate([np.ravel(x) for x in b_base]
                                    + [np.ravel(v) for v in b_convs.values()])
            scale = float(np.max(np.abs(flat_b))) or 1.0
            diff = float(np.max(np.abs(flat_a - flat_b)))
            if diff <= spec.talbot_rtol * scale:
                got = (b_base, b_convs)
                break
            if diff > 4.0 * best and best < 1e-3 * scale:
                break
            best = min(best, diff)
            n = int(np.ceil(n * 1.4))
        if got is None:
            raise TalbotNotConverged(
                f"talbot mode coefficients at t={ti:g} stalled at estimate {best:g}"
            )
        (g, x, gt, xt), convs = got
        gamma[it], xi[it], gamma_t[it], xi_t[it] = g, x, gt, xt
        if inv_ax is not None:
            osc = np.exp(-1j * omega_q * ti)  # (q,)
            iw = 1j * omega_q

            def reservoir(block_name, row, col, g_of_t, coupling):
                conv = convs[block_name] + osc[:, None, None] * inv_ax[:, row, col]
                total = g_of_t[None, :, :] - iw[:, None, None] * conv
                return total @ coupling

            if need_g:
                zeta[:, it] = mu0 * reservoir("ee", slice(0, 3), slice(0, 3), -x, g_q)
                zeta_t[:, it] = mu0 * reservoir("he", slice(3, 6), slice(0, 3), -xt, g_q)
            if need_f:
                eta[:, it] = -reservoir("eh", slice(0, 3), slice(3, 6), g, f_q)
                eta_t[:, it] = -reservoir("hh", slice(3, 6), slice(3, 6), gt, f_q)

    meta = {"method": "talbot", "worst_rcond": rcond_worst}
    return gamma, xi, gamma_t, xi_t, zeta, eta, zeta_t, eta_t, f_q, g_q, meta


def _line_mode_path(response, model_f, model_g, k, t, omega_q, spec, constants, conductor):
    """Vacuum-subtracted Bromwich-line inversion for continuum-absorption
    media.

    The free-space part of Lambda^-1 is inverted exactly (rational path, with
    the reservoir factors included), and only the medium-vacuum difference,
    which decays like |rho|^-3 along the line Re rho = a, is integrated
    numerically. All material evaluations stay in Re rho > 0, so the
    imaginary-axis branch cut of the absorption continuum is never crossed.
    """
    vac = laplace_response_like(response)
    vac_parts = _rational_mode_path(vac, model_f, model_g, k, t, omega_q, spec, constants)
    gamma, xi, gamma_t, xi_t, zeta, eta, zeta_t, eta_t, f_q, g_q, _ = vac_parts
    n_q = omega_q.size
    need_f = n_q > 0 and not model_f.is_zero
    need_g = n_q > 0 and not model_g.is_zero

    t_max = float(np.max(t)) if np.max(t) > 0 else 1.0
    a = spec.line_abscissa_factor / t_max
    scales = [1.0, constants.c * float(np.linalg.norm(k))]
    for m in (model_f, model_g):
        if not m.is_zero:
            scales.append(m.frequency_scale)
    y_top = spec.line_halfwidth_factor * max(scales)
    dy = min(0.5 / t_max, a / 6.0)
    n_y = int(2.0 * y_top / dy) + 1
    y = np.linspace(-y_top, y_top, n_y)
    dy = y[1] - y[0]
    rho = a + 1j * y

    def stacked_inverse(resp, cond):
        o = -curl_symbol(k)
        eps = resp.eps(k, rho)  # (n_y, 3, 3), batched
        mu = resp.mu(k, rho)
        lower = rho[:, None, None] * eps
        if cond:
            lower = lower + resp.sigma(k, rho)
        lam = np.empty((n_y, 6, 6), dtype=complex)
        lam[:, :3, :3] = o
        lam[:, :3, 3:] = -rho[:, None, None] * mu
        lam[:, 3:, :3] = lower
        lam[:, 3:, 3:] = o
        return np.linalg.inv(lam)

    inv_med = stacked_inverse(response, conductor)
    inv_vac = stacked_inverse(vac, False)
    diff = inv_med - inv_vac  # (n_y, 6, 6), ~ |rho|^-3 tail

    phases = dy * np.exp(np.outer(t, rho)) / (2.0 * np.pi)  # (n_t, n_y)
    blocks = {
        "ee": diff[:, :3, :3],
        "eh": diff[:, :3, 3:],
        "he": diff[:, 3:, :3],
        "hh": diff[:, 3:, 3:],
    }

    def line_sum(ph, b):
        return (ph @ b.reshape(b.shape[0], 9)).reshape(ph.shape[0], 3, 3)

    base = {name: line_sum(phases, b) for name, b in blocks.items()}
    coarse = {name: line_sum(2.0 * phases[:, ::2], b[::2]) for name, b in blocks.items()}
    scale = max(float(np.max(np.abs(base["eh"]))), 1e-30)
    est = max(float(np.max(np.abs(base[n] - coarse[n]))) for n in base) / scale
    if est > spec.line_rtol:
        raise TalbotNotConverged(
            f"bromwich line grid-halving estimate {est:g} above line_rtol {spec.line_rtol:g}"
        )

    gamma = gamma + base["eh"]
    xi = xi - base["ee"]
    gamma_t = gamma_t + base["hh"]
    xi_t = xi_t - base["he"]

    if need_f or need_g:
        fac_d = 1.0 / (rho[None, :] + 1j * omega_q[:, None])  # (q, j)

        def reservoir_diff(name, coupling):
            # conv[q] = phases @ diag(fac_d[q]) @ block: fold the reservoir
            # factor into the block side so one BLAS product covers all q
            block9 = blocks[name].reshape(n_y, 9)
            scaled = fac_d.T[:, :, None] * block9[:, None, :]  # (j, q, 9)
            conv = (phases @ scaled.reshape(n_y, n_q * 9)).reshape(t.size, n_q, 3, 3)
            conv = np.ascontiguousarray(np.moveaxis(conv, 0, 1))  # (q, t, 3, 3)
            out = (
                base[name][None, :, :, :]
                - 1j * omega_q[:, None, None, None] * conv
            ) @ coupling[:, None, :, :]
            return out

        if need_g:
            zeta = zeta + constants.mu0 * reservoir_diff("ee", g_q)
            zeta_t = zeta_t + constants.mu0 * reservoir_diff("he", g_q)
        if need_f:
            eta = eta - reservoir_diff("eh", f_q)
            eta_t = eta_t - reservoir_diff("hh", f_q)

    meta = {
        "method": "bromwich_line",
        "line_points": int(n_y),
        "line_halfwidth": float(y_top),
        "line_abscissa": float(a),
        "est_rel_error": est,
    }
    return gamma, xi, gamma_t, xi_t, zeta, eta, zeta_t, eta_t, f_q, g_q, meta


def laplace_response_like(response: LaplaceResponse) -> LaplaceResponse:
    """Vacuum response sharing the constants of an existing one."""
    from .couplings import zero_coupling
    from .response import laplace_response

    return laplace_response(
        zero_coupling("electric"),
        zero_coupling("magnetic"),
        constants=response.constants,
        quad=response.quad,
    )


def mode_coefficients(
    response: LaplaceResponse,
    model_f,
    model_g,
    k,
    t_grid,
    omega_q_grid,
    spec: InverseLaplaceSpec | None = None,
    constants: PhysicalConstants = NATURAL,
    conductor: bool = False,
) -> ModeCoefficients:
    """Mode-coefficient tensors on the (t, omega_q) grids.

    "auto" picks the exact rational path for isotropic rational media and
    the Bromwich line otherwise. Internally the block system is oriented
    with flipped curl blocks (Lambda(-k, rho) for even media), the one
    reading of the index map that reproduces the initial-data expansions at
    t = 0 with forward-evolving phases and keeps the equal-time commutators
    conserved; the t = 0 condition alone does not fix it because the zeta
    and eta-tilde families vanish there.
    """
    k = np.asarray(k, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    omega_q = np.asarray(omega_q_grid, dtype=float)
    if t.size == 0:
        raise ValidationError("t_grid must be nonempty")
    if spec is None:
        spec = InverseLaplaceSpec()
    method = spec.method
    if method == "auto":
        method = "rational_exact" if response.is_rational else "bromwich_line"
    if method == "rational_exact":
        if not response.is_rational:
            raise ValidationError(
                "rational_exact needs a rational material response; use bromwich_line"
            )
        parts = _rational_mode_path(response, model_f, model_g, k, t, omega_q, spec, constants)
    elif method == "talbot":
        if not response.is_rational:
            raise ValidationError(
                "talbot deforms into the left half-plane, which a continuum-"
                "absorption response cannot continue across; use bromwich_line"
            )
        parts = _talbot_mode_path(
            response, model_f, model_g, k, t, omega_q, spec, constants, conductor
        )
    else:
        parts = _line_mode_path(
            response, model_f, model_g, k, t, omega_q, spec, constants, conductor
        )
    gamma, xi, gamma_t, xi_t, zeta, eta, zeta_t, eta_t, f_q, g_q, meta = parts
    return ModeCoefficients(
        k=k,
        t_grid=t,
        omega_q_grid=omega_q,
        gamma=gamma,
        xi=xi,
        gamma_tilde=gamma_t,
        xi_tilde=xi_t,
        zeta=zeta,
        eta=eta,
        zeta_tilde=zeta_t,
        eta_tilde=eta_t,
        f_q=f_q,
        g_q=g_q,
        metadata=meta,
    )


@dataclass(frozen=True)
class RealityScanReport:
    max_deviation: float
    n_samples: int
    worst_k: np.ndarray | None
    worst_rho: float | None


def lambda_reality_scan(response: LaplaceResponse, k_set, rho_set, conductor=False) -> RealityScanReport:
    """Max deviation of Lambda(-k, rho) - conj(Lambda(k, rho)) on real rho > 0.

    The conjugation identity holds on the real rho axis for media whose
    k-space kernels respect real-space reality; violations (e.g. a tabulated
    model with complex entries) are reported, never raised."""
    worst = 0.0
    worst_k = None
    worst_rho = None
    n = 0
    for k in k_set:
        k = np.asarray(k, dtype=float)
        for rho in rho_set:
            rho = float(rho)
            a = assemble_lambda(response, k, rho, conductor=conductor).value
            b = assemble_lambda(response, -k, rho, conductor=conductor).value
            dev = float(np.max(np.abs(b - np.conj(a))))
            n += 1
            if dev > worst:
                worst, worst_k, worst_rho = dev, k, rho
    return RealityScanReport(max_deviation=worst, n_samples=n, worst_k=worst_k, worst_rho=worst_rho)
