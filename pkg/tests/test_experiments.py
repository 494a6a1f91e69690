import numpy as np
import pytest

from snaketeleop import backbone
from snaketeleop.experiments import (
    ExperimentConfig,
    PIVOT_HEADER,
    SHAPE_FITTING_HEADER,
    pursuit_policy,
    random_shapes,
    read_csv,
    run_locomotion_experiment,
    run_pivot_experiment,
    run_shape_fitting_experiment,
    straight_policy,
    synthetic_paths,
    tube_mouth_z,
    write_csv,
)


def small_config(**kw):
    kw.setdefault("n", 8)
    kw.setdefault("n_shapes", 3)
    kw.setdefault("n_iter", 60)
    return ExperimentConfig(**kw)


def test_random_shapes_deterministic(params30):
    a = random_shapes(5, 42, params30)
    b = random_shapes(5, 42, params30)
    for (qa, pa), (qb, pb) in zip(a, b):
        np.testing.assert_array_equal(qa, qb)
        np.testing.assert_array_equal(pa, pb)


def test_random_shapes_respect_limits_and_zero_feed(params30):
    for q_d, P_d in random_shapes(20, 7, params30):
        assert q_d[0] == 0.0
        assert np.all(q_d >= params30.q_min) and np.all(q_d <= params30.q_max)
        np.testing.assert_allclose(P_d, backbone(q_d, params30), atol=0)


def test_random_shapes_rejects_bad_count(params30):
    with pytest.raises(ValueError):
        random_shapes(0, 1, params30)


def test_shape_fitting_rows_structure(tmp_path):
    config = small_config(methods=("frechet", "point4"))
    rows = run_shape_fitting_experiment(config)
    assert {r["method"] for r in rows} == {"frechet", "point4"}
    per_method = [r for r in rows if r["method"] == "frechet"]
    assert len(per_method) == config.n_iter
    assert per_method[0]["iteration"] == 1
    assert all(r["mean_frechet_over_h"] >= 0 for r in rows)
    # errors decrease over the run
    assert per_method[-1]["mean_frechet_over_h"] < per_method[0]["mean_frechet_over_h"]
    csv_path = tmp_path / "shape_fitting.csv"
    write_csv(csv_path, SHAPE_FITTING_HEADER, rows)
    back = read_csv(csv_path)
    assert len(back) == len(rows)
    assert list(back[0].keys()) == SHAPE_FITTING_HEADER


def test_shape_fitting_deterministic_modulo_timing():
    config = small_config(methods=("frechet",), n_shapes=2, n_iter=30)
    a = run_shape_fitting_experiment(config)
    b = run_shape_fitting_experiment(config)
    keys = [k for k in SHAPE_FITTING_HEADER if k != "ms_per_iter"]
    for ra, rb in zip(a, b):
        for k in keys:
            assert ra[k] == rb[k], k


def test_synthetic_paths_geometry(params30):
    paths = synthetic_paths(params30)
    assert set(paths) == {"straight", "arc", "helix"}
    z0 = tube_mouth_z(params30)
    for name, path in paths.items():
        assert path.shape[1] == 3
        assert path[0, 2] == pytest.approx(z0, abs=1e-12)  # starts at the mouth
        seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
        assert seg.max() < 2 * params30.h  # densely sampled
    np.testing.assert_allclose(paths["straight"][:, :2], 0.0, atol=1e-12)
    assert abs(paths["helix"][-1][1]) > params30.h  # actually out of plane


def test_with_lead_in_endpoints(params30):
    from snaketeleop.experiments import with_lead_in

    paths = synthetic_paths(params30)
    ext = with_lead_in(paths["straight"], params30, base_z=0.05)
    assert ext[0, 2] == pytest.approx(0.05, abs=1e-12)
    np.testing.assert_array_equal(ext[-1], paths["straight"][-1])
    # vertices sit on an h grid anchored at the base (matching link spacing)
    seg = np.linalg.norm(np.diff(ext[:-1], axis=0), axis=1)
    np.testing.assert_allclose(seg, params30.h, atol=1e-12)
    # base past the path start: no lead-in, endpoints still preserved
    same = with_lead_in(paths["straight"], params30, base_z=1.0)
    np.testing.assert_array_equal(same[0], paths["straight"][0])
    np.testing.assert_array_equal(same[-1], paths["straight"][-1])


def test_locomotion_straight_small_error():
    config = ExperimentConfig(n=30, n_iter=600)
    params = config.params()
    paths = synthetic_paths(params)
    res = run_locomotion_experiment(config, paths["straight"], straight_policy,
                                    path_name="straight")
    assert res.limits_ok
    # full nominal run: the backbone must track the straight path closely
    assert res.final_frechet_over_h < 0.5


def test_locomotion_pursuit_policy_finite():
    config = ExperimentConfig(n=30, n_iter=600)
    params = config.params()
    paths = synthetic_paths(params)
    res = run_locomotion_experiment(config, paths["arc"], pursuit_policy,
                                    n_ticks=60, path_name="arc")
    assert res.limits_ok
    assert np.isfinite(res.final_frechet_over_h)


def test_pivot_rows_and_theta_zero(tmp_path):
    config = ExperimentConfig(n=30, n_iter=200)
    params = config.params()
    paths = {"straight": synthetic_paths(params)["straight"]}
    from snaketeleop.experiments import initial_path_fit

    q0 = initial_path_fit(params, paths["straight"], n_iter=250)
    rows = run_pivot_experiment(config, n_theta=2, n_phi=3, theta_max_deg=12.0,
                                pivot_iter=60, paths=paths, initial={"straight": q0})
    assert len(rows) == 2 * 2 * 3  # methods x thetas x phis
    for r in rows:
        if r["theta_deg"] == 0.0:
            assert r["frechet_over_h"] <= config.params().delta / config.h
    csv_path = tmp_path / "pivot.csv"
    write_csv(csv_path, PIVOT_HEADER, rows)
    assert read_csv(csv_path)[0].keys() == dict(zip(PIVOT_HEADER, PIVOT_HEADER)).keys()


def test_write_csv_is_byte_stable(tmp_path):
    rows = [{"a": 1, "b": 0.1 + 0.2}, {"a": 2, "b": float(np.float64(1) / 3)}]
    p1, p2 = tmp_path / "x.csv", tmp_path / "y.csv"
    write_csv(p1, ["a", "b"], rows)
    write_csv(p2, ["a", "b"], rows)
    assert p1.read_bytes() == p2.read_bytes()
