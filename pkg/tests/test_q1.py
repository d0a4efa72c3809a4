import numpy as np
import pytest

from polybell.bipartite import JointState, push_local_map
from polybell.core import Measurement, dichotomic_measurement, simplex_model
from polybell.correlations import correlations_from_state, pr_box_table, ray_settings
from polybell.polygon import max_entangled, polygon
from polybell.q1 import (
    Q1Certificate,
    certificate_from_inner_product_state,
    certificate_via_pushforward,
    q1_necessary_conditions,
    verify_delta_decomposition,
)
from polybell.selfdual import rotation_about_axis


def trit_state() -> tuple[JointState, Measurement]:
    tri = simplex_model(3)
    state = JointState(np.diag([0.5, 0.3, 0.2]), tri, tri)
    return state, Measurement(np.eye(3), tri)


def test_certificate_matches_table_entries():
    state = max_entangled(7)
    meas = ray_settings(state.model_a, 2)
    cert = certificate_from_inner_product_state(state, meas, meas)
    table = correlations_from_state(state, meas, meas)

    n_a = sum(cert.outcomes_a)
    marg_a = table.flat_marginal_a()
    marg_b = table.flat_marginal_b()
    joint = table.flat_joint()

    # first row and column carry the marginals
    np.testing.assert_allclose(cert.gamma[0, 1:1 + n_a], marg_a, atol=1e-12)
    np.testing.assert_allclose(cert.gamma[1 + n_a:, 0], marg_b, atol=1e-12)
    assert cert.gamma[0, 0] == pytest.approx(1.0, abs=1e-12)
    # cross block carries the joint probabilities
    np.testing.assert_allclose(
        cert.gamma[1:1 + n_a, 1 + n_a:], joint, atol=1e-12)
    # diagonal blocks: marginals on the diagonal, zero within a measurement
    for x in range(2):
        i0 = 1 + table.flat_index_a(x, 0)
        block = cert.gamma[i0:i0 + 2, i0:i0 + 2]
        np.testing.assert_allclose(
            block, np.diag(marg_a[i0 - 1:i0 + 1]), atol=1e-12)


def test_certificate_psd_and_verdict():
    state = max_entangled(5)
    meas = ray_settings(state.model_a, 2)
    cert = certificate_from_inner_product_state(state, meas, meas)
    assert cert.psd()
    assert cert.verdict() == "in-Q1"
    spectrum = np.linalg.eigvalsh(cert.gamma)
    np.testing.assert_allclose(spectrum, cert.eigen_spectrum, atol=1e-12)


def test_certificate_classical_trit():
    state, meas = trit_state()
    cert = certificate_from_inner_product_state(state, [meas], [meas])
    assert cert.verdict() == "in-Q1"
    assert cert.outcomes_a == (3,)
    data = cert.to_dict()
    assert data["schema_version"] >= 1
    assert data["verdict"] == "in-Q1"


def test_certificate_rejects_even_polygon():
    state = max_entangled(6)
    meas = ray_settings(state.model_a, 2)
    with pytest.raises(ValueError, match="inner-product"):
        certificate_from_inner_product_state(state, meas, meas)


def test_supplied_gamma_verdict():
    bad = np.diag([1.0, -1.0, 1.0])
    cert = Q1Certificate.from_gamma(bad, [1], [1])
    assert not cert.psd()
    assert cert.verdict() == "undetermined"
    assert cert.free_entries_source == "supplied"


def test_delta_decomposition_dichotomic():
    state = max_entangled(9)
    meas = dichotomic_measurement(state.model_a, 3)
    assert verify_delta_decomposition(state, meas)


def test_delta_decomposition_three_outcomes():
    state, meas = trit_state()
    assert verify_delta_decomposition(state, meas)


def test_delta_decomposition_needs_inner_product_state():
    state = max_entangled(4)
    meas = dichotomic_measurement(state.model_a, 0)
    with pytest.raises(ValueError):
        verify_delta_decomposition(state, meas)


def test_necessary_conditions_pr_box():
    report = q1_necessary_conditions(pr_box_table())
    assert report.verdict == "not-in-Q1"
    assert not report.chsh_ok
    assert report.chsh_value == pytest.approx(4.0, abs=0)
    assert not report.uffink_ok
    assert report.uffink_value == pytest.approx(8.0, abs=0)


def test_necessary_conditions_quantum_like_pass():
    state = max_entangled(5)
    meas = ray_settings(state.model_a, 2)
    report = q1_necessary_conditions(correlations_from_state(state, meas, meas))
    assert report.verdict == "undetermined"
    assert report.chsh_ok and report.uffink_ok
    assert report.to_dict()["verdict"] == "undetermined"


def test_pushforward_certificate_roundtrip():
    sigma = max_entangled(7)
    tau = rotation_about_axis(2 * np.pi / 7)
    omega = push_local_map(sigma, tau)
    meas = ray_settings(sigma.model_a, 2)
    cert = certificate_via_pushforward(omega, tau, meas, meas, sigma=sigma)
    assert cert.verdict() == "in-Q1"


def test_pushforward_certificate_rejects_wrong_preimage():
    sigma = max_entangled(7)
    tau = rotation_about_axis(2 * np.pi / 7)
    omega = push_local_map(sigma, tau)
    other = max_entangled(7)
    wrong_tau = rotation_about_axis(4 * np.pi / 7)
    meas = ray_settings(sigma.model_a, 2)
    with pytest.raises(ValueError, match="pushforward"):
        certificate_via_pushforward(omega, wrong_tau, meas, meas, sigma=other)


def test_pushforward_certificate_needs_inner_product_preimage():
    sigma = max_entangled(6)
    tau = rotation_about_axis(2 * np.pi / 6)
    omega = push_local_map(sigma, tau)
    meas = ray_settings(sigma.model_a, 2)
    with pytest.raises(ValueError, match="inner-product"):
        certificate_via_pushforward(omega, tau, meas, meas, sigma=sigma)


def test_gamma_shape_validation():
    with pytest.raises(ValueError):
        Q1Certificate(gamma=np.eye(4), eigen_spectrum=np.ones(4),
                      outcomes_a=(2,), outcomes_b=(2,))
