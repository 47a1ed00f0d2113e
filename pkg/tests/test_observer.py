import math

import numpy as np
import pytest

from scalarcf import observer, sensors, so3


def random_rotation(rng):
    w = rng.normal(size=3)
    w /= np.linalg.norm(w)
    return so3.exp_so3(w * rng.uniform(0, math.pi - 0.01))


def random_scalar_bank(rng, n_channels=2):
    chans = []
    for _ in range(n_channels):
        b = rng.normal(size=3)
        axes = rng.normal(size=(3, rng.integers(1, 4)))
        chans.append(sensors.SensorChannel(b, axes))
    return sensors.SensorBank(tuple(chans))


def test_state_validation():
    with pytest.raises(ValueError):
        observer.ObserverState(np.eye(4), 1.0)
    with pytest.raises(ValueError):
        observer.ObserverState(np.eye(3), 0.0)
    with pytest.raises(ValueError):
        observer.ObserverState(np.eye(3), -2.0)


def test_innovation_zero_at_truth():
    rng = np.random.default_rng(20)
    for _ in range(20):
        R = random_rotation(rng)
        bank = random_scalar_bank(rng)
        y = sensors.measure(bank, R)
        rep = observer.innovation(bank, observer.ObserverState(R, 1.7), y)
        assert np.max(np.abs(rep.delta)) < 1e-12


def test_contributions_sum_to_delta():
    rng = np.random.default_rng(21)
    bank = random_scalar_bank(rng, n_channels=3)
    y = sensors.measure(bank, random_rotation(rng))
    rep = observer.innovation(bank, observer.ObserverState(random_rotation(rng), 0.8), y)
    assert len(rep.contributions) == 3
    assert np.allclose(sum(rep.contributions), rep.delta)


def test_innovation_scales_linearly_with_gain():
    rng = np.random.default_rng(22)
    bank = random_scalar_bank(rng)
    R, R_hat = random_rotation(rng), random_rotation(rng)
    y = sensors.measure(bank, R)
    d1 = observer.innovation(bank, observer.ObserverState(R_hat, 1.0), y).delta
    d3 = observer.innovation(bank, observer.ObserverState(R_hat, 3.0), y).delta
    assert np.allclose(d3, 3.0 * d1)


def test_precomputed_factorizations_change_nothing():
    rng = np.random.default_rng(23)
    bank = random_scalar_bank(rng)
    R, R_hat = random_rotation(rng), random_rotation(rng)
    y = sensors.measure(bank, R)
    st = observer.ObserverState(R_hat, 1.3)
    base = observer.innovation(bank, st, y).delta
    pre = observer.innovation(
        bank,
        st,
        y,
        gram_fact=sensors.gram(bank),
        axes_facts=tuple(sensors.axes_factorization(c) for c in bank.channels),
    ).delta
    assert np.array_equal(base, pre)


def test_classical_requires_identity_axes():
    bank = sensors.SensorBank(
        (sensors.SensorChannel(np.array([1.0, 0, 0]), np.eye(3)[:, :2]),)
    )
    y = np.zeros(2)
    with pytest.raises(observer.NotVectorBankError):
        observer.classical_innovation(bank, observer.ObserverState(np.eye(3), 1.0), y)


def test_classical_rejects_wrong_length():
    bank = sensors.vector_bank([np.array([0.0, 0, 1.0])])
    with pytest.raises(observer.NotVectorBankError):
        observer.classical_innovation(
            bank, observer.ObserverState(np.eye(3), 1.0), np.zeros(4)
        )


def test_classical_innovation_formula():
    rng = np.random.default_rng(24)
    for _ in range(20):
        refs = [rng.normal(size=3) for _ in range(2)]
        bank = sensors.vector_bank(refs)
        R, R_hat = random_rotation(rng), random_rotation(rng)
        k = rng.uniform(0.5, 2.0)
        y = sensors.measure(bank, R)
        got = observer.classical_innovation(bank, observer.ObserverState(R_hat, k), y)
        acc = np.zeros(3)
        for c, yi in zip(bank.channels, y.values):
            acc += np.cross(yi, R_hat.T @ c.ref)
        assert np.allclose(got, k * (R_hat @ acc))


def test_truth_step_constant_rate_accuracy():
    """RK4 over one millistep tracks the closed-form rotation to ~1e-15."""
    rng = np.random.default_rng(25)
    R = random_rotation(rng)
    omega = np.array([0.3, -1.1, 0.7])
    dt = 1e-3
    stepped = observer.truth_step(R, omega, dt)
    exact = R @ so3.exp_so3(omega * dt)
    assert np.max(np.abs(stepped - exact)) < 1e-14
    assert so3.is_rotation(stepped, tol=1e-12)


def test_observer_step_reduces_error():
    rng = np.random.default_rng(26)
    R = random_rotation(rng)
    bank = sensors.vector_bank([np.array([0, 0, 9.8]), np.array([1.0, 0, 0.5])])
    y = sensors.measure(bank, R)
    R_hat = R @ so3.exp_so3(np.array([0.3, 0.1, -0.2]))
    st = observer.ObserverState(R_hat, 2.0)
    before = so3.rotation_angle(R_hat @ R.T)
    for _ in range(200):
        delta = observer.classical_innovation(bank, st, y)
        st = observer.observer_step(st, np.zeros(3), delta, 1e-2)
    after = so3.rotation_angle(st.R_hat @ R.T)
    assert after < 0.05 * before


def test_observer_step_accepts_callables():
    st = observer.ObserverState(np.eye(3), 1.0)
    omega = lambda s: np.array([0.0, 0.0, 1.0])
    delta = lambda s, R: np.zeros(3)
    out = observer.observer_step(st, omega, delta, 0.1)
    assert np.allclose(out.R_hat, so3.rot_z(0.1), atol=1e-8)
