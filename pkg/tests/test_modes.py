import numpy as np
import pytest

from mqed.couplings import (
    TabulatedTable,
    drude,
    eval_coupling_batch,
    gaussian_anisotropic,
    lorentz_isotropic,
    tabulated,
    zero_coupling,
)
from mqed.errors import (
    LeftHalfPlane,
    PoleFindingFailed,
    SingularLambda,
    ValidationError,
)
from mqed.modes import (
    InverseLaplaceSpec,
    assemble_lambda,
    inverse_laplace,
    invert_lambda,
    lambda_reality_scan,
    mode_coefficients,
)
from mqed.rational import Rational, ilt_rational, partial_fractions
from mqed.response import laplace_response
from mqed.tensors import (
    curl_symbol,
    longitudinal_projector,
    transverse_projector,
)

K = np.array([0.0, 0.0, 1.3])
WK = float(np.linalg.norm(K))


def vacuum_response():
    return laplace_response(zero_coupling("electric"), zero_coupling("magnetic"))


def lorentz_pair():
    me = lorentz_isotropic(1.3, 1.0, 0.5)
    mm = lorentz_isotropic(0.8, 1.4, 0.6, which="magnetic")
    return me, mm, laplace_response(me, mm)


def test_spec_validation():
    with pytest.raises(ValidationError):
        InverseLaplaceSpec(method="bogus")
    with pytest.raises(ValidationError):
        InverseLaplaceSpec(talbot_start_n=8)


def test_inverse_laplace_textbook_exponential():
    spec = InverseLaplaceSpec(method="talbot", talbot_rtol=1e-11)
    got = inverse_laplace(lambda r: 1.0 / (r + 1.0), [1.0], spec)[0]
    assert abs(got - np.exp(-1.0)) < 1e-12


def test_inverse_laplace_textbook_cosine():
    t = np.linspace(0.0, 3.0, 13)
    spec = InverseLaplaceSpec(method="talbot", talbot_rtol=1e-10)
    got = inverse_laplace(lambda r: r / (r**2 + 4.0), t, spec)
    assert np.max(np.abs(got - np.cos(2.0 * t))) < 1e-10


def test_inverse_laplace_rational_exact():
    t = np.linspace(0.0, 6.0, 25)
    got = inverse_laplace(Rational.make([0.0, 1.0], [4.0, 0.0, 1.0]), t,
                          InverseLaplaceSpec(method="rational_exact"))
    assert np.max(np.abs(got - np.cos(2.0 * t))) < 1e-12


def test_inverse_laplace_rational_requires_rational():
    with pytest.raises(PoleFindingFailed):
        inverse_laplace(lambda r: 1.0 / r, [1.0], InverseLaplaceSpec(method="rational_exact"))


def test_partial_fractions_zero_residue_at_shared_simple_roots():
    # (rho * (rho + 2)) / (rho * (rho + 2) * (rho + 1)) == 1 / (rho + 1):
    # the shared simple roots survive with zero residue
    num = np.array([0.0, 2.0, 1.0])
    den = np.array([0.0, 2.0, 3.0, 1.0])
    t = np.linspace(0.0, 4.0, 9)
    values, poles, residues = ilt_rational(Rational.make(num, den), t)
    assert np.max(np.abs(values - np.exp(-t))) < 1e-12
    res_at = {round(p.real, 6): r for p, r in zip(poles, residues)}
    assert abs(res_at[0.0]) < 1e-12 and abs(res_at[-2.0]) < 1e-12


def test_partial_fractions_cancels_removable_repeated_root():
    # rho / (rho^2 (rho + 1)) == 1 / (rho (rho + 1)): the doubled root at 0
    # is removable and must be deflated, not rejected
    num = np.array([0.0, 1.0])
    den = np.array([0.0, 0.0, 1.0, 1.0])
    t = np.linspace(0.0, 4.0, 9)
    values, poles, _ = ilt_rational(Rational.make(num, den), t)
    assert poles.size == 2
    assert np.max(np.abs(values - (1.0 - np.exp(-t)))) < 1e-12


def test_partial_fractions_rejects_true_double_pole():
    with pytest.raises(PoleFindingFailed):
        partial_fractions(Rational.make([1.0], [1.0, 2.0, 1.0]))  # 1/(1+rho)^2


def test_assemble_lambda_vacuum_blocks():
    lam = assemble_lambda(vacuum_response(), K, 1.0)
    o = curl_symbol(K)
    assert np.allclose(lam.value[:3, :3], o)
    assert np.allclose(lam.value[3:, 3:], o)
    assert np.allclose(lam.value[:3, 3:], -np.eye(3))
    assert np.allclose(lam.value[3:, :3], np.eye(3))


def test_assemble_lambda_left_half_plane():
    with pytest.raises(LeftHalfPlane):
        assemble_lambda(vacuum_response(), K, -0.5)


def test_assemble_lambda_reality_identity():
    _, _, resp = lorentz_pair()
    rng = np.random.default_rng(17)
    for _ in range(20):
        k = rng.standard_normal(3)
        rho = rng.uniform(0.1, 4.0)
        a = assemble_lambda(resp, k, rho).value
        b = assemble_lambda(resp, -k, rho).value
        assert np.max(np.abs(b - np.conj(a))) < 1e-14


def test_invert_lambda_vacuum_transverse_block():
    rho = 0.8
    lam = assemble_lambda(vacuum_response(), K, rho)
    inv = invert_lambda(lam)
    p_t = transverse_projector(K)
    expected = rho / (rho**2 + WK**2) * p_t
    assert np.max(np.abs(inv[:3, 3:] @ p_t - expected)) < 1e-12
    assert np.max(np.abs(lam.value @ inv - np.eye(6))) < 1e-11


def test_invert_lambda_multiply_back_random_medium():
    _, _, resp = lorentz_pair()
    rng = np.random.default_rng(23)
    for _ in range(10):
        lam = assemble_lambda(resp, rng.standard_normal(3), rng.uniform(0.2, 3.0))
        inv = invert_lambda(lam)
        assert np.max(np.abs(lam.value @ inv - np.eye(6))) < 1e-11


def test_invert_lambda_singular_on_dispersion_shell():
    rho = 1e-14 + 1j * WK  # vacuum pole at rho = i c |k|
    lam = assemble_lambda(vacuum_response(), K, rho)
    with pytest.raises(SingularLambda):
        invert_lambda(lam)


def test_conductor_block_substitution():
    from mqed.conductor import ConductorScenario

    scenario = ConductorScenario(
        bound_electric=lorentz_isotropic(1.0, 1.0, 0.4),
        free_electric=drude(1.1, 0.5),
        magnetic=zero_coupling("magnetic"),
    )
    resp = scenario.response()
    rho = 0.9
    lam_d = assemble_lambda(resp, K, rho, conductor=False)
    lam_c = assemble_lambda(resp, K, rho, conductor=True)
    sigma = resp.sigma(K, rho)
    assert np.max(np.abs(lam_c.value[3:, :3] - lam_d.value[3:, :3] - sigma)) < 1e-14
    assert np.allclose(lam_c.value[:3, :3], lam_d.value[:3, :3])


def test_lambda_reality_scan_media():
    _, _, resp = lorentz_pair()
    rng = np.random.default_rng(29)
    report = lambda_reality_scan(resp, rng.standard_normal((100, 3)),
                                 rng.uniform(0.1, 5.0, 100))
    assert report.max_deviation < 1e-13
    assert report.n_samples == 10_000


def test_lambda_reality_scan_flags_violation():
    # tabulated coupling with complex entries: |k|-only dependence cannot
    # satisfy f(-k) = conj(f(k)), so Lambda reality fails and is reported
    omegas = np.linspace(1e-4, 30.0, 50)
    kmags = np.array([0.1, 5.0])
    values = np.zeros((50, 2, 3, 3), dtype=complex)
    values[:, :, 0, 1] = 0.3j
    values[:, :, 1, 0] = 0.3
    values[:, :, 0, 0] = values[:, :, 1, 1] = values[:, :, 2, 2] = 0.4
    model = tabulated(TabulatedTable(omegas=omegas, kmags=kmags, values=values))
    resp = laplace_response(model, zero_coupling("magnetic"))
    report = lambda_reality_scan(resp, [np.array([0.0, 0.0, 1.0])], [0.7])
    assert report.max_deviation > 1e-3


def test_vacuum_mode_coefficients_closed_forms():
    resp = vacuum_response()
    t = np.linspace(0.0, 10.0, 41)
    mc = mode_coefficients(resp, zero_coupling("electric"), zero_coupling("magnetic"),
                           K, t, [])
    p_t = transverse_projector(K)
    p_l = longitudinal_projector(K)
    o = curl_symbol(K)
    cos = np.cos(WK * t)[:, None, None]
    sin = (np.sin(WK * t) / WK)[:, None, None]
    ones = np.ones_like(t)[:, None, None]
    assert np.max(np.abs(mc.gamma - (cos * p_t + ones * p_l))) < 1e-9
    assert np.max(np.abs(mc.xi - sin * o)) < 1e-9
    assert np.max(np.abs(mc.gamma_tilde - (-sin * o))) < 1e-9
    assert np.max(np.abs(mc.xi_tilde - (cos * p_t + ones * p_l))) < 1e-9
    assert mc.zeta.size == 0 or np.max(np.abs(mc.zeta)) == 0.0


def test_vacuum_reservoir_coefficients_vanish():
    resp = vacuum_response()
    t = np.linspace(0.0, 5.0, 11)
    mc = mode_coefficients(resp, zero_coupling("electric"), zero_coupling("magnetic"),
                           K, t, [0.5, 1.5])
    for name in ("zeta", "eta", "zeta_tilde", "eta_tilde"):
        assert np.max(np.abs(getattr(mc, name))) == 0.0


def test_medium_initial_values():
    me, mm, resp = lorentz_pair()
    t = np.linspace(0.0, 6.0, 7)
    wq = np.array([0.6, 2.3, 20.0])
    mc = mode_coefficients(resp, me, mm, K, t, wq)
    f_q = eval_coupling_batch(me, wq, K)
    g_q = eval_coupling_batch(mm, wq, K)
    assert np.max(np.abs(mc.gamma[0] - np.eye(3))) < 1e-12
    assert np.max(np.abs(mc.xi[0])) < 1e-12
    assert np.max(np.abs(mc.zeta[:, 0])) < 1e-12
    assert np.max(np.abs(mc.eta_tilde[:, 0])) < 1e-12
    assert np.max(np.abs(mc.eta[:, 0] + f_q)) < 1e-12
    assert np.max(np.abs(mc.zeta_tilde[:, 0] + g_q)) < 1e-12


def test_initial_value_theorem_vs_small_time():
    me, mm, resp = lorentz_pair()
    rho_big = 1e6
    lam1 = np.linalg.inv(assemble_lambda(resp, K, rho_big, curl_sign=-1).value)
    lam2 = np.linalg.inv(assemble_lambda(resp, K, 2.0 * rho_big, curl_sign=-1).value)
    limit = 2.0 * (2.0 * rho_big * lam2) - rho_big * lam1
    t = np.array([0.0, 1e-6])
    mc = mode_coefficients(resp, me, mm, K, t, [])
    assert np.max(np.abs(mc.gamma[1] - limit[:3, 3:])) < 1e-6
    # xi has a vanishing t -> 0 limit; the comparison floor is its O(t) slope
    assert np.max(np.abs(mc.xi[1] + limit[:3, :3])) < 2e-6


def test_dual_method_agreement_lorentz():
    me, mm, resp = lorentz_pair()
    t = np.linspace(0.0, 6.0, 7)
    wq = np.array([0.6, 2.3, 20.0])
    a = mode_coefficients(resp, me, mm, K, t, wq)
    b = mode_coefficients(
        resp, me, mm, K, t, wq,
        spec=InverseLaplaceSpec(method="talbot", talbot_rtol=1e-9),
    )
    for name in ("gamma", "xi", "gamma_tilde", "xi_tilde", "zeta", "eta",
                 "zeta_tilde", "eta_tilde"):
        x, y = getattr(a, name), getattr(b, name)
        scale = max(float(np.max(np.abs(x))), 1e-30)
        assert np.max(np.abs(x - y)) / scale < 1e-8, name


def test_talbot_rejects_continuum_absorption():
    mg = gaussian_anisotropic((1.0, 0.7, 0.4), 1.0, 0.5)
    resp = laplace_response(mg, zero_coupling("magnetic"))
    with pytest.raises(ValidationError):
        mode_coefficients(resp, mg, zero_coupling("magnetic"), K,
                          np.linspace(0.0, 2.0, 3), [],
                          spec=InverseLaplaceSpec(method="talbot"))


def test_line_method_matches_rational_on_rational_medium():
    me, mm, resp = lorentz_pair()
    t = np.linspace(0.0, 6.0, 7)
    wq = np.array([0.6, 2.3])
    a = mode_coefficients(resp, me, mm, K, t, wq)
    b = mode_coefficients(resp, me, mm, K, t, wq,
                          spec=InverseLaplaceSpec(method="bromwich_line"))
    for name in ("gamma", "xi", "gamma_tilde", "xi_tilde", "zeta", "eta",
                 "zeta_tilde", "eta_tilde"):
        x, y = getattr(a, name), getattr(b, name)
        scale = max(float(np.max(np.abs(x))), 1e-30)
        assert np.max(np.abs(x - y)) / scale < 2e-4, name


def test_gaussian_medium_line_path_initial_data():
    mg = gaussian_anisotropic((1.0, 0.7, 0.4), 1.0, 0.5)
    resp = laplace_response(mg, zero_coupling("magnetic"))
    t = np.linspace(0.0, 6.0, 7)
    wq = np.array([0.6, 2.3, 20.0])
    mc = mode_coefficients(resp, mg, zero_coupling("magnetic"), K, t, wq)
    assert mc.metadata["method"] == "bromwich_line"
    f_q = eval_coupling_batch(mg, wq, K)
    assert np.max(np.abs(mc.gamma[0] - np.eye(3))) < 1e-5
    assert np.max(np.abs(mc.eta[:, 0] + f_q)) < 1e-6


def test_drude_poles_flagged_stable():
    md = drude(1.1, 0.5)
    resp = laplace_response(md, zero_coupling("magnetic"))
    mc = mode_coefficients(resp, md, zero_coupling("magnetic"), K,
                           np.linspace(0.0, 5.0, 6), [0.9])
    assert mc.metadata["unstable_poles"] == 0
    assert mc.metadata["max_re_pole"] <= 1e-10
