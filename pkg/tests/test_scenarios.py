import math

import numpy as np
import pytest

from scalarcf import scenarios, sensors, so3


def test_config_for_validation():
    with pytest.raises(ValueError):
        scenarios.config_for("sim9")
    with pytest.raises(ValueError):
        scenarios.config_for("custom")  # needs a family
    with pytest.raises(ValueError):
        scenarios.config_for("sim1", family="sim2")
    with pytest.raises(ValueError):
        scenarios.config_for("sim1", no_such_field=1.0)
    with pytest.raises(ValueError):
        scenarios.config_for("sim1", dt=-1.0)
    with pytest.raises(ValueError):
        scenarios.config_for("sim1", duration=0.5, dt=1.0)
    with pytest.raises(ValueError):
        scenarios.config_for("sim2", k_scalar=0.0)
    with pytest.raises(ValueError):
        scenarios.config_for("sim2", noise_std=-0.1)


def test_named_config_helpers_match():
    assert scenarios.sim1_config().duration == scenarios.config_for("sim1").duration
    assert scenarios.sim2_config(dt=0.01).dt == 0.01
    assert scenarios.sim3_config().family == "sim3"


def test_steps_row_count():
    cfg = scenarios.config_for("sim3", duration=2.0, dt=1e-3)
    assert cfg.steps == 2000
    # duration not on the grid rounds down
    cfg = scenarios.config_for("sim3", duration=1.0005, dt=1e-3)
    assert cfg.steps == 1000


@pytest.mark.parametrize("scen", ["sim1", "sim2", "sim3"])
def test_truth_is_rotation_everywhere(scen):
    cfg = scenarios.config_for(scen)
    t = np.linspace(0.0, cfg.duration, 400)
    tr = scenarios.truth_arrays(cfg, t)
    gram = np.matmul(np.swapaxes(tr.R, 1, 2), tr.R)
    assert np.max(np.abs(gram - np.eye(3))) < 1e-12
    assert np.allclose(np.linalg.det(tr.R), 1.0, atol=1e-12)


@pytest.mark.parametrize("scen", ["sim1", "sim2", "sim3"])
def test_angular_velocity_consistent_with_attitude(scen):
    """Omega is the body rate of the closed-form attitude: Rdot = R [Omega]x."""
    cfg = scenarios.config_for(scen)
    h = 1e-6
    # avoid the rate discontinuities at the sim1 segment boundaries
    checkpoints = [0.3, 1.1, 2.9, 11.0, 13.5, 20.0, min(45.0, cfg.duration - 1.0)]
    for t0 in checkpoints:
        tr = scenarios.truth_arrays(cfg, [t0 - h, t0, t0 + h])
        Rdot_num = (tr.R[2] - tr.R[0]) / (2 * h)
        Rdot_ana = tr.R[1] @ so3.hat(tr.Omega[1])
        assert np.max(np.abs(Rdot_num - Rdot_ana)) < 1e-6


def test_sim1_stall_segment_constant_heading():
    cfg = scenarios.config_for("sim1")
    t = np.linspace(math.pi + 0.1, 4.0 * math.pi - 0.1, 50)
    tr = scenarios.truth_arrays(cfg, t)
    assert np.max(np.abs(tr.Omega)) < 1e-14
    assert np.max(np.abs(tr.R - tr.R[0])) < 1e-12
    # and motion resumes right after
    tr2 = scenarios.truth_arrays(cfg, [4.0 * math.pi + 0.2])
    assert np.max(np.abs(tr2.Omega)) > 1e-3


def test_sim1_truth_continuous_at_segment_boundaries():
    cfg = scenarios.config_for("sim1")
    for tb in (math.pi, 4.0 * math.pi):
        tr = scenarios.truth_arrays(cfg, [tb - 1e-9, tb + 1e-9])
        assert np.max(np.abs(tr.R[1] - tr.R[0])) < 1e-6


def test_reference_vectors_by_family():
    cfg1 = scenarios.config_for("sim1")
    tr = scenarios.truth_arrays(cfg1, [0.0, 2.0])
    assert np.allclose(tr.refs[0][:, 0], [0, 0, scenarios.GRAVITY])
    assert np.allclose(tr.refs[0][:, 1], tr.refs[1][:, 1])  # magnetic ref fixed
    assert np.isclose(np.linalg.norm(tr.refs[0][:, 2]), cfg1.v_speed)

    cfg3 = scenarios.config_for("sim3")
    tr3 = scenarios.truth_arrays(cfg3, [0.0, 1.0])
    assert tr3.refs.shape[2] == 1
    v0, v1 = tr3.refs[0][:, 0], tr3.refs[1][:, 0]
    assert not np.allclose(v0, v1)  # the loiter turns the velocity reference


def test_magnetic_reference_dip():
    cfg = scenarios.config_for("sim1")
    m = scenarios.truth_arrays(cfg, [0.0]).refs[0][:, 1]
    m = m / np.linalg.norm(m)
    assert np.isclose(m[2], -math.sin(cfg.gamma_dip), atol=1e-12) or np.isclose(
        m[2], math.sin(cfg.gamma_dip), atol=1e-12
    )
    assert abs(m[1]) < 1e-12  # dip plane contains north


def test_pitot_geometry_properties():
    a1, a2, n = scenarios.pitot_geometry(math.radians(45), math.radians(20))
    for v in (a1, a2, n):
        assert np.isclose(np.linalg.norm(v), 1.0, atol=1e-12)
    assert abs(n @ a1) < 1e-12
    assert abs(n @ a2) < 1e-12
    # spread is symmetric about the tilted centerline
    assert np.isclose(a1 @ a2, math.cos(2 * math.radians(20)), atol=1e-12)


def test_pitot_geometry_degenerate():
    with pytest.raises(scenarios.DegenerateGeometryError):
        scenarios.pitot_geometry(math.radians(45), 0.0)


def test_variants_by_family():
    v1 = scenarios.variants_for(scenarios.config_for("sim1"))
    assert set(v1) == {"scalar-3", "scalar-6", "vector-baseline"}
    assert v1["scalar-3"].axes.shape == (3, 1)
    assert v1["scalar-6"].axes.shape == (3, 2)
    v2 = scenarios.variants_for(scenarios.config_for("sim2"))
    assert set(v2) == {"scalar-2", "vector-baseline"}
    v3 = scenarios.variants_for(scenarios.config_for("sim3"))
    assert set(v3) == {"scalar-2", "vector-baseline"}
    assert v3["scalar-2"].axes.shape == (3, 2)


def test_sample_builds_matching_bank():
    cfg = scenarios.config_for("sim2")
    s = scenarios.sample(cfg, 0.7, "scalar-2")
    tr = scenarios.truth_arrays(cfg, [0.7])
    assert np.allclose(s.R, tr.R[0])
    assert len(s.bank.channels) == 2
    for ch, col in zip(s.bank.channels, (0, 1)):
        assert np.allclose(ch.ref, tr.refs[0][:, col])
        assert ch.axes.shape == (3, 1)


def test_sample_vector_bank_normalizes():
    cfg = scenarios.config_for("sim1")
    s = scenarios.sample(cfg, 0.2, "vector-baseline")
    for ch in s.bank.channels:
        assert np.isclose(np.linalg.norm(ch.ref), 1.0, atol=1e-12)
        assert np.allclose(ch.axes, np.eye(3))


def test_sample_rejects_foreign_variant():
    cfg = scenarios.config_for("sim3")
    with pytest.raises(scenarios.IncompatibleVariantError):
        scenarios.sample(cfg, 0.0, "scalar-6")


def test_sim1_reference_gram_well_conditioned():
    """Gravity + magnetic + velocity stay uniformly independent."""
    cfg = scenarios.config_for("sim1")
    for t in (0.0, 2.0, 50.0, 99.0):
        s = scenarios.sample(cfg, t, "scalar-3")
        g = sensors.gram(s.bank)
        assert g.rank == 3
        # the weakest direction is covered mostly by the horizontal part of
        # the magnetic reference, cos(gamma_dip)^2 = 0.25
        assert g.lambda_min_nonzero > 0.15


def test_certified_epsilon_values():
    cfg2 = scenarios.config_for("sim2")
    assert np.isclose(scenarios.certified_epsilon(cfg2), math.sin(cfg2.psi0))
    cfg3 = scenarios.config_for("sim3")
    want = math.sqrt(
        1.0
        - math.cos(cfg3.beta_max) ** 2 * math.sin(cfg3.gamma_tilt - cfg3.alpha_max) ** 2
    )
    assert np.isclose(scenarios.certified_epsilon(cfg3), want)
    assert scenarios.certified_epsilon(scenarios.config_for("sim1")) is None


def test_certified_epsilon_bounds_instantaneous_sim2():
    from scalarcf import analysis

    cfg = scenarios.config_for("sim2")
    spec = scenarios.variants_for(cfg)["scalar-2"]
    bound = scenarios.certified_epsilon(cfg)
    t = np.linspace(0, cfg.duration, 800)
    tr = scenarios.truth_arrays(cfg, t)
    a = spec.axes[:, 0]
    worst = 0.0
    for j in range(t.size):
        eps = analysis.epsilon_two_refs(a, tr.R[j], tr.refs[j][:, 0], tr.refs[j][:, 1])
        worst = max(worst, eps)
    assert worst <= bound + 1e-9


def test_r0_true_matches_initial_family_state():
    cfg = scenarios.config_for("sim2")
    tr = scenarios.truth_arrays(cfg, [0.0])
    assert np.allclose(cfg.r0_true, tr.R[0])
