import numpy as np
import pytest

from curveflow import (
    EnergyParams,
    FlowConfig,
    ReducedCoords,
    Scenario,
    SolverOptions,
    TooFewPoints,
    boundary_residual,
    fd_gradient_check,
    from_reduced,
    interior_residual,
    loop_diameter,
    make_scenario,
    run_flow,
    self_intersections,
    to_reduced,
    validate,
)
from curveflow.diagnostics import crossing_pairs, full_residual_report

from oracles import brute_force_crossings, random_open_curve


def straight_segment(length, n):
    pts = np.column_stack([np.linspace(0, length, n), np.zeros(n)])
    return validate(pts)


def test_fd_check_at_stationary_point():
    seg = straight_segment(1.0, 12)
    err = fd_gradient_check(to_reduced(seg), seg, EnergyParams(0.05, 0.1))
    assert err < 1e-7


def test_fd_check_random_configurations():
    rng = np.random.default_rng(41)
    params = EnergyParams(epsilon=0.05, tau=0.1)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(5, 41))
        base, edge_len, headings = random_open_curve(rng, n)
        prev = from_reduced(ReducedCoords(base, edge_len, headings))
        cand = ReducedCoords(
            base + rng.uniform(-0.03, 0.03, 2),
            edge_len * float(rng.uniform(0.95, 1.05)),
            headings + rng.uniform(-0.08, 0.08, n - 1),
        )
        worst = max(worst, fd_gradient_check(cand, prev, params))
    assert worst < 1e-6


def test_fd_check_without_bending_path():
    # epsilon ~ 0 isolates the Coulomb + length + dissipation gradients
    rng = np.random.default_rng(42)
    params = EnergyParams(epsilon=1e-300, tau=0.1)
    base, edge_len, headings = random_open_curve(rng, 15)
    prev = from_reduced(ReducedCoords(base, edge_len, headings))
    cand = ReducedCoords(base, edge_len, headings + rng.uniform(-0.05, 0.05, 14))
    assert fd_gradient_check(cand, prev, params) < 1e-6


@pytest.fixture(scope="module")
def shrink_traj():
    seg = straight_segment(2.0, 21)
    cfg = FlowConfig(
        params=EnergyParams(epsilon=0.01, tau=0.05),
        n_steps=10,
        solver=SolverOptions(grad_tol=1e-10),
    )
    return run_flow(seg, cfg)


def test_interior_residual_straight_flow(shrink_traj):
    rep = interior_residual(shrink_traj, 0, EnergyParams(0.01, 0.05))
    assert rep.interior_max < 1e-8
    assert rep.interior_L2 < 1e-8


def test_interior_residual_stationary_zero():
    seg = straight_segment(1.0, 15)
    cfg = FlowConfig(params=EnergyParams(epsilon=0.01, tau=0.05), n_steps=1)
    traj = run_flow(seg, cfg)
    rep = interior_residual(traj, 0, EnergyParams(0.01, 0.05))
    assert rep.interior_max < 1e-10


def test_boundary_residual_stationary_unit_segment():
    seg = straight_segment(1.0, 15)
    cfg = FlowConfig(params=EnergyParams(epsilon=0.01, tau=0.05), n_steps=1)
    traj = run_flow(seg, cfg)
    rep = boundary_residual(traj, 0, EnergyParams(0.01, 0.05))
    assert np.linalg.norm(rep.boundary_start) < 1e-7
    assert np.linalg.norm(rep.boundary_end) < 1e-7
    assert rep.kappa_boundary[0] < 1e-10


def test_boundary_residual_first_shrink_step(shrink_traj):
    rep = boundary_residual(shrink_traj, 0, EnergyParams(0.01, 0.05))
    assert np.linalg.norm(rep.boundary_start) < 0.1
    assert np.linalg.norm(rep.boundary_end) < 0.1


def test_residuals_require_five_points():
    seg = straight_segment(1.0, 4)
    cfg = FlowConfig(params=EnergyParams(epsilon=0.01, tau=0.05), n_steps=1)
    traj = run_flow(seg, cfg)
    with pytest.raises(TooFewPoints):
        interior_residual(traj, 0, EnergyParams(0.01, 0.05))


def test_full_report_is_finite_on_sinus():
    sin_curve = make_scenario(Scenario(kind="sinus", n=41))
    cfg = FlowConfig(
        params=EnergyParams(epsilon=0.01, tau=0.25),
        n_steps=5,
        solver=SolverOptions(grad_tol=1e-8),
    )
    traj = run_flow(sin_curve, cfg)
    for k in range(4):
        rep = full_residual_report(traj, k, cfg.params)
        assert np.isfinite(rep.interior_L2)
        assert np.isfinite(rep.interior_max)
        assert np.isfinite(rep.coupling_L2)
        assert np.all(np.isfinite(rep.boundary_start))
        assert np.all(np.isfinite(rep.boundary_end))


def test_self_intersections_straight():
    assert self_intersections(straight_segment(1.0, 10)) == 0


def test_self_intersections_figure_zigzag():
    from curveflow import resample_equal_arclength

    zig = resample_equal_arclength([(0, 0), (2, 0), (2, 1), (0, -1)], 40)
    n_pkg = self_intersections(zig)
    n_ref = brute_force_crossings(zig.points)
    assert n_pkg == n_ref
    assert n_pkg >= 1


def test_self_intersections_gamma_matches_brute_force():
    g = make_scenario(Scenario(kind="gamma", n=120))
    assert self_intersections(g) == 1
    assert brute_force_crossings(g.points) == 1
    a = make_scenario(Scenario(kind="asym_gamma", n=120))
    assert self_intersections(a) == 1


def test_self_intersections_random_matches_brute_force():
    rng = np.random.default_rng(43)
    for _ in range(40):
        base, edge_len, headings = random_open_curve(rng, 20, min_gap=1e-3)
        c = from_reduced(ReducedCoords(base, edge_len, headings))
        assert self_intersections(c) == brute_force_crossings(c.points)


def test_loop_diameter_gamma():
    g = make_scenario(Scenario(kind="gamma", n=120))
    pairs = crossing_pairs(g)
    assert len(pairs) == 1
    d = loop_diameter(g)
    # the loop encloses the tangent circle: diameter above 2r, below total size
    assert 0.7 < d < 1.2
    assert loop_diameter(straight_segment(1.0, 8)) == 0.0
