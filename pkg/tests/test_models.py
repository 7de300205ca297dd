from __future__ import annotations

import math
import zlib

import numpy as np
import pytest

from netsync.graph import build_from_edges, build_star, laplacian
from netsync.models import (
    FhnParams,
    HarmonicParams,
    KuramotoStarParams,
    SystemSpec,
    WienParams,
    fhn_network_rhs,
    fhn_rhs,
    fhn_star_rhs,
    kuramoto_reduced_jacobian,
    kuramoto_reduced_rhs,
    kuramoto_star_rhs,
    msf_block_matrix,
)

FIVE = [(0, 1), (0, 3), (1, 2), (1, 4), (3, 4)]


def central_difference(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    cols = []
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = h * max(1.0, abs(x[k]))
        cols.append((f(x + e) - f(x - e)) / (2.0 * e[k]))
    return np.column_stack(cols)


def all_specs() -> dict[str, SystemSpec]:
    kp = KuramotoStarParams(1.3, 0.9, (0.5, 1.0, 1.5), (2.0, 0.7, 1.1))
    fhn = FhnParams()
    return {
        "kuramoto_star": SystemSpec("kuramoto_star", kp),
        "kuramoto_reduced": SystemSpec("kuramoto_reduced", kp),
        "fhn_single": SystemSpec("fhn_single", fhn),
        "fhn_star": SystemSpec("fhn_star", fhn, incoming=(0.115, 0.3), outgoing=(0.2, 0.115)),
        "fhn_network": SystemSpec("fhn_network", fhn, build_from_edges(5, FIVE), 0.115),
        "wien_bridge": SystemSpec("wien_bridge", WienParams.from_rc(1e3, 1e-6, 3.2, 1.0)),
        "harmonic": SystemSpec("harmonic", HarmonicParams(3.0)),
    }


@pytest.mark.parametrize("model", list(all_specs()))
def test_analytic_jacobian_matches_finite_differences(model):
    spec = all_specs()[model]
    r = np.random.default_rng(zlib.crc32(model.encode()))
    worst = 0.0
    for _ in range(50):
        x = r.uniform(-2.0, 2.0, spec.state_dim)
        J = spec.jacobian(x)
        fd = central_difference(spec.rhs, x)
        # relative to the Jacobian's scale (the Wien model has entries ~ omega0^2)
        worst = max(worst, np.abs(J - fd).max() / max(1.0, np.abs(J).max()))
    assert worst < 1e-5


@pytest.mark.parametrize(
    "model", ["kuramoto_star", "kuramoto_reduced", "fhn_single", "fhn_star", "fhn_network"]
)
def test_fast_field_equals_reference_function(model):
    spec = all_specs()[model]
    p = spec.params
    reference = {
        "kuramoto_star": lambda x: kuramoto_star_rhs(x, p),
        "kuramoto_reduced": lambda x: kuramoto_reduced_rhs(x, p),
        "fhn_single": lambda x: fhn_rhs(x, p),
        "fhn_star": lambda x: fhn_star_rhs(x, p, spec.incoming, spec.outgoing),
        "fhn_network": lambda x: fhn_network_rhs(x, p, spec.graph, spec.coupling),
    }[model]
    r = np.random.default_rng(1)
    for _ in range(20):
        x = r.uniform(-2, 2, spec.state_dim)
        assert np.allclose(spec.rhs(x), reference(x), rtol=1e-14, atol=1e-14)


def test_reduced_kuramoto_jacobian_at_two_pi_is_exact():
    p = KuramotoStarParams.identical(3, 1.0, 1.0, 1.0, 1.0)
    J = kuramoto_reduced_jacobian(np.full(3, 2.0 * np.pi), p)
    expected = np.array([[-2.0, -1.0, -1.0], [-1.0, -2.0, -1.0], [-1.0, -1.0, -2.0]])
    assert np.array_equal(J, expected)
    assert np.allclose(np.sort(np.linalg.eigvals(J).real), [-4.0, -1.0, -1.0], atol=1e-12)


def test_reduced_system_is_the_hub_minus_peripheral_dynamics():
    p = KuramotoStarParams(1.2, 0.8, (0.4, 0.9), (1.1, 0.6))
    r = np.random.default_rng(4)
    for _ in range(20):
        th = r.uniform(-np.pi, np.pi, 3)
        d = kuramoto_star_rhs(th, p)
        x = th[0] - th[1:]
        assert np.allclose(kuramoto_reduced_rhs(x, p), d[0] - d[1:], atol=1e-14)


def _sync_state(n_nodes, node_state):
    return np.tile(np.asarray(node_state, dtype=float), n_nodes)


def test_diffusive_coupling_vanishes_on_synchronous_manifold():
    r = np.random.default_rng(9)
    fhn = FhnParams()
    specs = [
        SystemSpec("fhn_network", fhn, build_from_edges(5, FIVE), 0.115),
        SystemSpec("fhn_network", fhn, build_star(6), 3.7),
        SystemSpec("fhn_star", fhn, incoming=(0.115, 2.0, 0.3), outgoing=(0.5, 0.115, 1.0)),
    ]
    for spec in specs:
        C = spec.coupling_matrix()
        iso = spec.isolated()
        for _ in range(50):
            node = r.uniform(-3, 3, 2)
            s = _sync_state(spec.n_nodes, node)
            assert np.abs(spec.coupling_term(s)).max() <= 1e-14
            assert np.abs(C @ s).max() <= 1e-14 * np.abs(C).max() * np.abs(s).max() * spec.n_nodes
            assert np.abs(spec.rhs(s) - _sync_state(spec.n_nodes, iso.rhs(node))).max() <= 1e-14


def test_coupling_matrix_matches_laplacian_form():
    g = build_from_edges(5, FIVE)
    spec = SystemSpec("fhn_network", FhnParams(), g, 0.115)
    expected = -0.115 * np.kron(laplacian(g).matrix, np.eye(2))
    assert np.allclose(spec.coupling_matrix(), expected, atol=1e-15)
    x = np.random.default_rng(0).normal(size=10)
    assert np.allclose(spec.coupling_term(x), expected @ x, atol=1e-14)


def test_kuramoto_coupling_vanishes_when_phases_agree():
    p = KuramotoStarParams(1.0, 1.0, (0.3, 1.0, 2.0), (1.0, 0.5, 0.1))
    for theta in np.linspace(-10, 10, 21):
        d = kuramoto_star_rhs(np.full(4, theta), p)
        assert np.abs(d - 1.0).max() <= 1e-14


def test_network_field_is_equivariant_under_relabeling():
    r = np.random.default_rng(2)
    g = build_from_edges(5, FIVE)
    perm = r.permutation(5)
    relabeled = build_from_edges(5, [(int(perm[i]), int(perm[j])) for i, j in FIVE])
    a = SystemSpec("fhn_network", FhnParams(), g, 0.4)
    b = SystemSpec("fhn_network", FhnParams(), relabeled, 0.4)
    for _ in range(10):
        X = r.uniform(-2, 2, (5, 2))
        Y = np.empty_like(X)
        Y[perm] = X
        fa = a.rhs(X.ravel()).reshape(5, 2)
        fb = b.rhs(Y.ravel()).reshape(5, 2)
        assert np.allclose(fb[perm], fa, atol=1e-14)


def test_kuramoto_is_invariant_under_global_phase_shift():
    p = KuramotoStarParams(1.0, 0.7, (0.3, 1.0), (1.0, 0.5))
    r = np.random.default_rng(5)
    th = r.uniform(-3, 3, 3)
    for shift in (0.1, -2.0, 2 * np.pi, 40.0):
        assert np.allclose(kuramoto_star_rhs(th + shift, p), kuramoto_star_rhs(th, p), atol=1e-12)


def test_msf_block_shifts_the_diagonal():
    p = FhnParams()
    J = msf_block_matrix([0.3, -0.2], p, 0.0)
    assert np.array_equal(msf_block_matrix([0.3, -0.2], p, 0.7), J - 0.7 * np.eye(2))
    with pytest.raises(ValueError):
        msf_block_matrix([0.0, 0.0], p, math.inf)


def test_wien_parameters_from_devices_and_rc():
    w = WienParams.from_rc(1e3, 1e-6, 3.2, 1.0)
    assert w.omega0 == pytest.approx(1000.0)
    assert w.natural_frequency_hz == pytest.approx(159.15494309189535)
    assert w.weakly_nonlinear_amplitude == pytest.approx(2 * math.sqrt(0.2))
    d = WienParams.from_devices(1e3, 1e-6, 3.2, i_s=1e-12, r_f2=1e4, n=1.0, v_t=0.025)
    assert d.k_nl == pytest.approx(8 * 1e-12 * 1e4 / (9 * 0.025**3))
    assert WienParams.from_rc(1e3, 1e-6, 2.5, 1.0).weakly_nonlinear_amplitude == 0.0


@pytest.mark.parametrize(
    "build",
    [
        lambda: SystemSpec("nope", FhnParams()),
        lambda: SystemSpec("fhn_single", HarmonicParams()),
        lambda: SystemSpec("fhn_network", FhnParams()),
        lambda: SystemSpec("fhn_network", FhnParams(), build_star(2), -1.0),
        lambda: SystemSpec("fhn_star", FhnParams(), incoming=(1.0,)),
        lambda: SystemSpec("fhn_star", FhnParams(), build_star(3), incoming=(1.0,), outgoing=(1.0,)),
        lambda: SystemSpec("fhn_star", FhnParams(), build_from_edges(3, [(0, 1), (1, 2)]), 0.1),
        lambda: KuramotoStarParams(1.0, 1.0, (1.0,), (1.0, 2.0)),
        lambda: WienParams(-1.0, 3.2, 1.0),
        lambda: WienParams(1.0, 3.2, 0.0),
        lambda: FhnParams(c=0.0),
    ],
)
def test_invalid_systems_are_rejected(build):
    with pytest.raises((ValueError, TypeError)):
        build()


def test_state_length_is_checked():
    spec = all_specs()["fhn_network"]
    with pytest.raises(ValueError):
        spec.rhs(np.zeros(4))
    with pytest.raises(ValueError):
        fhn_rhs(np.zeros(3), FhnParams())


def test_default_fhn_star_is_a_two_peripheral_star():
    spec = SystemSpec("fhn_star", FhnParams(), coupling=0.115)
    assert spec.n_nodes == 3 and spec.state_dim == 6
    assert spec.incoming == spec.outgoing == (0.115, 0.115)
