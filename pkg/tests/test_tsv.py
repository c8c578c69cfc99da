import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twostate import qcore as q
from twostate.errors import AllAmplitudesZero, DimensionMismatch, OrthogonalSelection
from twostate.qcore import Observable, StateVector, ket
from twostate.tsv import (
    EPS_ORTHO,
    GeneralizedTwoState,
    MeasurementEvent,
    PrePostEnsemble,
    abl_probability,
    marginal,
    multi_time_abl,
    outcome_probability,
    path_amplitudes,
    weak_value,
    weak_value_generalized,
)

from helpers import random_eigen_observable, random_hermitian, random_state, random_unitary

R3 = 1 / np.sqrt(3)


@pytest.fixture
def three_box():
    pre = ket(R3, R3, R3, basis="ABC")
    post = ket(R3, R3, -R3, basis="ABC")
    proj = {b: Observable(np.diag([float(b == c) for c in "ABC"]), "ABC") for b in "ABC"}
    return PrePostEnsemble(pre, post), proj


def test_three_box_abl_certainties(three_box):
    ens, p = three_box
    assert abs(abl_probability(ens, p["A"])[1.0] - 1) <= 1e-12
    assert abs(abl_probability(ens, p["B"])[1.0] - 1) <= 1e-12
    assert abl_probability(ens, p["C"])[1.0] == pytest.approx(1 / 5)


def test_three_box_weak_values(three_box):
    ens, p = three_box
    assert abs(weak_value(ens, p["C"]) + 1) <= 1e-12
    assert abs(weak_value(ens, p["A"]) - 1) <= 1e-12


def test_three_box_joint_is_zero(three_box):
    ens, p = three_box
    joint = multi_time_abl(ens, [MeasurementEvent(0, p["A"]), MeasurementEvent(1, p["B"])])
    assert joint[(1.0, 1.0)] <= 1e-30
    assert sum(joint.values()) == pytest.approx(1, abs=1e-12)


def test_sigma_xi_abl_value_and_closed_form():
    ens = PrePostEnsemble(q.UP_X, q.UP_Y)
    p = abl_probability(ens, q.sigma_xi(np.pi / 4))
    assert abs(p[1.0] - (1.5 + np.sqrt(2)) / 3) <= 1e-12
    c8, s8 = np.cos(np.pi / 8), np.sin(np.pi / 8)
    assert abs(p[1.0] - c8**4 / (c8**4 + s8**4)) <= 1e-12
    for xi in np.linspace(0, np.pi / 2, 7):
        c, s = np.cos(xi), np.sin(xi)
        closed = (1 + c + s + c * s) / (2 * (1 + c * s))
        assert abs(outcome_probability(abl_probability(ens, q.sigma_xi(xi)), 1.0) - closed) <= 1e-12


def test_eigenstate_pre_and_post():
    ens = PrePostEnsemble(q.UP_Z, q.UP_Z)
    assert abl_probability(ens, q.SIGMA_Z) == {-1.0: 0.0, 1.0: 1.0}


def test_weak_value_examples():
    ens = PrePostEnsemble(q.UP_X, q.UP_Y)
    assert abs(weak_value(ens, q.sigma_xi()) - np.sqrt(2)) <= 1e-12
    assert abs(weak_value(ens, q.SIGMA_Z) - 1j) <= 1e-12
    assert abs(weak_value(ens, q.identity(2, q.SPIN_BASIS)) - 1) <= 1e-15


def test_weak_value_orthogonal_selection():
    with pytest.raises(OrthogonalSelection):
        weak_value(PrePostEnsemble(q.UP_Z, q.DOWN_Z), q.SIGMA_X)
    nearly = StateVector([1e-12, 1.0])
    with pytest.raises(OrthogonalSelection):
        weak_value(PrePostEnsemble(q.UP_Z, nearly), q.SIGMA_X)
    ok = StateVector([1e-9, 1.0])
    assert np.isfinite(weak_value(PrePostEnsemble(q.UP_Z, ok), q.SIGMA_X))


def test_abl_rescues_orthogonal_selection():
    ens = PrePostEnsemble(q.UP_Z, q.DOWN_Z)
    assert ens.degenerate
    p = abl_probability(ens, q.SIGMA_X)
    assert p == pytest.approx({-1.0: 0.5, 1.0: 0.5}, abs=1e-12)


def test_all_amplitudes_zero():
    ens = PrePostEnsemble(q.UP_Z, q.DOWN_Z)
    with pytest.raises(AllAmplitudesZero):
        abl_probability(ens, q.SIGMA_Z)
    with pytest.raises(AllAmplitudesZero):
        multi_time_abl(ens, [MeasurementEvent(0, q.SIGMA_Z)])


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        PrePostEnsemble(q.UP_Z, ket(1, 0, 0))
    ens = PrePostEnsemble(q.UP_Z, q.UP_X)
    with pytest.raises(DimensionMismatch):
        weak_value(ens, np.eye(3))
    with pytest.raises(DimensionMismatch):
        abl_probability(ens, Observable(np.eye(3)))


def test_multi_time_order_matters():
    ens = PrePostEnsemble(q.UP_X, q.UP_Y)
    xy = multi_time_abl(ens, [MeasurementEvent(0, q.SIGMA_X), MeasurementEvent(1, q.SIGMA_Y)])
    assert abs(xy[(1.0, 1.0)] - 1) <= 1e-12
    yx = multi_time_abl(ens, [MeasurementEvent(0, q.SIGMA_Y), MeasurementEvent(1, q.SIGMA_X)])
    for outcome in itertools.product((-1.0, 1.0), repeat=2):
        assert abs(yx[outcome] - 0.25) <= 1e-12


def test_multi_time_validation_and_filter(three_box):
    ens, p = three_box
    with pytest.raises(ValueError):
        multi_time_abl(ens, [])
    with pytest.raises(ValueError):
        multi_time_abl(ens, [MeasurementEvent(1, p["A"]), MeasurementEvent(1, p["B"])])
    full = multi_time_abl(ens, [MeasurementEvent(0, p["C"]), MeasurementEvent(1, p["A"])])
    only = multi_time_abl(ens, [MeasurementEvent(0, p["C"], outcome_filter=1.0), MeasurementEvent(1, p["A"])])
    assert set(only) == {k for k in full if k[0] == 1.0}
    for k, v in only.items():
        assert v == full[k]


def test_single_event_matches_abl():
    rng = np.random.default_rng(3)
    for _ in range(100):
        d = int(rng.integers(2, 7))
        ens = PrePostEnsemble(random_state(rng, d), random_state(rng, d))
        obs = random_eigen_observable(rng, d)
        joint = multi_time_abl(ens, [MeasurementEvent(0, obs)])
        single = abl_probability(ens, obs)
        for k, v in joint.items():
            assert abs(v - single[k[0]]) <= 1e-12


def test_multi_time_last_event_marginal():
    ens = PrePostEnsemble(q.UP_X, q.UP_Y)
    joint = multi_time_abl(ens, [MeasurementEvent(0, q.SIGMA_Z), MeasurementEvent(1, q.SIGMA_X)])
    m = marginal(joint, 1)
    assert sum(m.values()) == pytest.approx(1, abs=1e-12)


def test_multi_time_matches_explicit_product():
    rng = np.random.default_rng(9)
    for _ in range(30):
        d = int(rng.integers(2, 5))
        pre, post = random_state(rng, d), random_state(rng, d)
        a, b, c = (random_eigen_observable(rng, d) for _ in range(3))
        joint = multi_time_abl(PrePostEnsemble(pre, post), [MeasurementEvent(t, o) for t, o in enumerate((a, b, c))])
        raw = {}
        for pa, pb, pc in itertools.product(a.spectrum, b.spectrum, c.spectrum):
            amp = np.vdot(post.amplitudes, pc.projector @ pb.projector @ pa.projector @ pre.amplitudes)
            raw[(pa.value, pb.value, pc.value)] = abs(amp) ** 2
        z = sum(raw.values())
        for k in raw:
            assert abs(joint[k] - raw[k] / z) <= 1e-12


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_abl_normalization_and_time_symmetry(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 9))
    ens = PrePostEnsemble(
        random_state(rng, d), random_state(rng, d), random_unitary(rng, d), random_unitary(rng, d)
    )
    obs = random_eigen_observable(rng, d) if rng.random() < 0.5 else random_hermitian(rng, d)
    fwd = abl_probability(ens, obs)
    back = abl_probability(ens.time_reversed(), obs)
    assert abs(sum(fwd.values()) - 1) <= 1e-12
    for k in fwd:
        assert abs(fwd[k] - back[k]) <= 1e-12


def test_unitaries_enter_as_documented():
    rng = np.random.default_rng(1)
    d = 3
    pre, post = random_state(rng, d), random_state(rng, d)
    u1, u2 = random_unitary(rng, d), random_unitary(rng, d)
    obs = random_hermitian(rng, d)
    ens = PrePostEnsemble(pre, post, u1, u2)
    num = np.vdot(post.amplitudes, u2.matrix @ obs.matrix @ u1.matrix @ pre.amplitudes)
    den = np.vdot(post.amplitudes, u2.matrix @ u1.matrix @ pre.amplitudes)
    assert abs(weak_value(ens, obs) - num / den) <= 1e-12 * max(1, abs(num / den))


def test_weak_value_is_linear():
    rng = np.random.default_rng(100)
    for _ in range(200):
        d = int(rng.integers(1, 9))
        ens = PrePostEnsemble(random_state(rng, d), random_state(rng, d))
        a, b = random_hermitian(rng, d), random_hermitian(rng, d)
        lhs = weak_value(ens, a + b)
        rhs = weak_value(ens, a) + weak_value(ens, b)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_certain_outcome_gives_eigenvalue_weak_value():
    rng = np.random.default_rng(200)
    for _ in range(200):
        d = int(rng.integers(2, 7))
        obs = random_eigen_observable(rng, d)
        space = obs.spectrum[int(rng.integers(len(obs.spectrum)))]
        eig = StateVector(space.projector @ random_state(rng, d).amplitudes)
        other = random_state(rng, d)
        pre, post = (eig, other) if rng.random() < 0.5 else (other, eig)
        ens = PrePostEnsemble(pre, post)
        assert abs(abl_probability(ens, obs)[space.value] - 1) <= 1e-10
        assert abs(weak_value(ens, obs) - space.value) <= 1e-10


def test_preonly_reduction_to_expectation():
    rng = np.random.default_rng(300)
    for _ in range(100):
        d = int(rng.integers(1, 7))
        pre, u1, u2 = random_state(rng, d), random_unitary(rng, d), random_unitary(rng, d)
        post = StateVector(u2.matrix @ u1.matrix @ pre.amplitudes)
        obs = random_hermitian(rng, d)
        ens = PrePostEnsemble(pre, post, u1, u2)
        expect = obs.expectation(StateVector(u1.matrix @ pre.amplitudes))
        assert abs(weak_value(ens, obs) - expect) <= 1e-12 * max(1, abs(expect))


def test_path_amplitudes_sum_to_overlap():
    rng = np.random.default_rng(4)
    ens = PrePostEnsemble(random_state(rng, 4), random_state(rng, 4))
    obs = random_hermitian(rng, 4)
    assert abs(sum(a for _, a in path_amplitudes(ens, obs)) - ens.overlap) <= 1e-12


# --- generalized two-state -------------------------------------------------------


def ancilla_weak_value(terms, m: np.ndarray) -> complex:
    """Doubled-space construction: pre sum_i |phi_i>|i>, post sum_i conj(alpha_i) |psi_i>|i>."""
    k = len(terms)
    pre = sum(np.kron(ket_.amplitudes, np.eye(k)[i]) for i, (_, _, ket_) in enumerate(terms))
    post = sum(np.conj(a) * np.kron(bra.amplitudes, np.eye(k)[i]) for i, (a, bra, _) in enumerate(terms))
    ens = PrePostEnsemble(StateVector(pre), StateVector(post))
    return weak_value(ens, np.kron(m, np.eye(k)))


def test_generalized_single_term_reduces():
    rng = np.random.default_rng(8)
    pre, post = random_state(rng, 3), random_state(rng, 3)
    obs = random_hermitian(rng, 3)
    g = GeneralizedTwoState(((1.0, post, pre),))
    assert abs(weak_value_generalized(g, obs) - weak_value(PrePostEnsemble(pre, post), obs)) <= 1e-12


def test_generalized_zero_weight_term_is_ignored():
    rng = np.random.default_rng(12)
    pre, post = random_state(rng, 3), random_state(rng, 3)
    junk_a, junk_b = random_state(rng, 3), random_state(rng, 3)
    obs = random_hermitian(rng, 3)
    g = GeneralizedTwoState(((1.0, post, pre), (0.0, junk_a, junk_b)))
    assert abs(weak_value_generalized(g, obs) - weak_value(PrePostEnsemble(pre, post), obs)) <= 1e-12


def test_generalized_matches_ancilla_oracle():
    rng = np.random.default_rng(13)
    for _ in range(100):
        d, k = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        terms = tuple(
            (complex(*rng.normal(size=2)), random_state(rng, d), random_state(rng, d)) for _ in range(k)
        )
        g = GeneralizedTwoState(terms)
        m = random_hermitian(rng, d)
        assert abs(weak_value_generalized(g, m) - ancilla_weak_value(terms, m.matrix)) <= 1e-9


def test_generalized_vanishing_normalization():
    g = GeneralizedTwoState(((1.0, q.UP_Z, q.UP_Z), (-1.0, q.DOWN_Z, q.DOWN_Z)))
    with pytest.raises(OrthogonalSelection):
        weak_value_generalized(g, q.SIGMA_X)
    with pytest.raises(ValueError):
        GeneralizedTwoState(())
    with pytest.raises(DimensionMismatch):
        GeneralizedTwoState(((1.0, q.UP_Z, ket(1, 0, 0)),))


def _epr_generalized(chi: StateVector, omega: StateVector) -> GeneralizedTwoState:
    """(1/sqrt2)(<dn|_1 |up>_2 - <up|_1 |dn>_2), completed by a pre `chi` of
    particle 1 and a post `omega` of particle 2."""
    r = 1 / np.sqrt(2)
    return GeneralizedTwoState((
        (r, q.tensor_product(q.DOWN_Z, omega), q.tensor_product(chi, q.UP_Z)),
        (-r, q.tensor_product(q.UP_Z, omega), q.tensor_product(chi, q.DOWN_Z)),
    ))


def test_epr_generalized_state_correlations():
    rng = np.random.default_rng(21)
    eye = np.eye(2)
    for _ in range(20):
        chi, omega = StateVector(random_state(rng, 2).amplitudes, q.SPIN_BASIS), StateVector(
            random_state(rng, 2).amplitudes, q.SPIN_BASIS
        )
        g = _epr_generalized(chi, omega)
        for name, s in (("x", q.SIGMA_X), ("y", q.SIGMA_Y), ("z", q.SIGMA_Z)):
            w1 = weak_value_generalized(g, np.kron(s.matrix, eye))
            w2 = weak_value_generalized(g, np.kron(eye, s.matrix))
            assert abs(w1 - ancilla_weak_value(g.terms, np.kron(s.matrix, eye))) <= 1e-9
            # the bra-to-ket map is i sigma_y / sqrt2: it anticommutes with x, z and commutes with y
            if name == "y":
                assert abs(w1 - w2) <= 1e-9 * max(1, abs(w1))
            else:
                assert abs(w1 + w2) <= 1e-9 * max(1, abs(w1))


def test_epr_contraction_on_a_single_space_vanishes():
    r = 1 / np.sqrt(2)
    g = GeneralizedTwoState(((r, q.DOWN_Z, q.UP_Z), (-r, q.UP_Z, q.DOWN_Z)))
    assert abs(g.contract()) == 0
    with pytest.raises(OrthogonalSelection):
        weak_value_generalized(g, q.SIGMA_Z)


def test_eps_ortho_value():
    assert EPS_ORTHO == 1e-10
