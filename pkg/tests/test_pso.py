import math
from types import SimpleNamespace

import numpy as np
import pytest

from oracles import exhaustive_optimum
from sectorthin.errors import ConfigInvalid
from sectorthin.geometry import GeometryConfig, build_layout, expand_chromosome, rotate
from sectorthin.metrics import CutMetrics
from sectorthin.pattern import PatternConfig
from sectorthin.pso import (HINGE, SIGMOID, SQUARE, THRESHOLD, FitnessSpec, Particle, PsoConfig, Swarm,
                            ThinningProblem, fitness, run_pso, update_position, update_velocity)


def _m(sll, bw):
    return CutMetrics(sll, bw, 0, (0.0, 0.0))


def test_fitness_examples():
    spec = FitnessSpec(-25.0, 4.0, penalty_mode=SQUARE)
    assert fitness(_m(-25.0, 4.0), spec) == 0.0
    assert fitness(_m(-20.0, 9.0), FitnessSpec(-25.0, 4.0, 1.0, 0.0, SQUARE)) == 25.0
    assert fitness(_m(-27.0, 3.5), FitnessSpec(-25.0, 4.0, penalty_mode=HINGE)) == 0.0
    # verbatim squared form penalizes beating the requirement too
    assert fitness(_m(-27.0, 3.5), spec) == pytest.approx(4.25)
    assert fitness(_m(-23.0, 5.0), FitnessSpec(-25.0, 4.0, 2.0, 3.0)) == pytest.approx(11.0)


def test_fitness_spec_validation():
    with pytest.raises(ConfigInvalid):
        FitnessSpec(w1=0, w2=0)
    with pytest.raises(ConfigInvalid):
        FitnessSpec(penalty_mode="l1")
    with pytest.raises(ConfigInvalid):
        fitness(_m(-20, 3), FitnessSpec())


@pytest.mark.parametrize("kwargs", [dict(swarm_size=1), dict(omega=0), dict(chi=1.5),
                                    dict(c1=0), dict(binarization="round"), dict(init_fill=2)])
def test_pso_config_validation(kwargs):
    with pytest.raises(ConfigInvalid):
        PsoConfig(**kwargs)


def test_pso_defaults():
    cfg = PsoConfig()
    assert (cfg.omega, cfg.c1, cfg.c2, cfg.chi) == (0.75, 2.5, 2.5, 0.75)
    assert cfg.swarm_size == 30 and cfg.v_max == 4.0 and cfg.max_iters == 1000


def _particle(x, v, pb):
    return Particle(np.asarray(x, float), np.asarray(v, float), np.asarray(pb, float))


def test_velocity_converged_particle():
    p = _particle([1, 0, 1], [0, 0, 0], [1, 0, 1])
    v = update_velocity(p, np.array([1, 0, 1]), PsoConfig(), np.random.default_rng(0))
    np.testing.assert_array_equal(v, 0)


def test_velocity_pure_inertia():
    p = _particle([0, 1, 0.5], [0.3, -1.2, 2.0], [1, 0, 1])
    # c1 = c2 = 0 is outside PsoConfig's valid range; the update rule itself accepts it
    cfg = SimpleNamespace(omega=1.0, c1=0.0, c2=0.0, v_max=4.0)
    v = update_velocity(p, np.array([0, 0, 1]), cfg, np.random.default_rng(0))
    np.testing.assert_array_equal(v, p.v)


def test_velocity_clamped():
    p = _particle([0, 0], [4, -4], [1, 1])
    v = update_velocity(p, np.array([1, 1]), PsoConfig(omega=1.0), np.random.default_rng(1))
    assert np.all(np.abs(v) <= 4.0)


def test_velocity_mean_matches_expectation():
    n = 100_000
    p = _particle(np.zeros(n), np.zeros(n), np.ones(n))
    cfg = SimpleNamespace(omega=0.0, c1=2.5, c2=2.5, v_max=10.0)
    v = update_velocity(p, np.ones(n), cfg, np.random.default_rng(7))
    assert v.mean() == pytest.approx((cfg.c1 + cfg.c2) / 2, rel=0.01)


def test_position_fixpoint_and_threshold():
    cfg = PsoConfig(binarization=THRESHOLD)
    x, bits = update_position(_particle([1, 0], [0, 0], [1, 0]), cfg)
    np.testing.assert_array_equal(bits, [1, 0])
    x, bits = update_position(_particle([0.4], [0.4], [0]), cfg)
    assert x[0] == pytest.approx(0.7) and bits[0] == 1
    x, bits = update_position(_particle([0.9], [-4], [0]), cfg)
    assert x[0] == 0.0 and bits[0] == 0


def test_sigmoid_rule_saturates():
    n = 10_000
    cfg = PsoConfig(binarization=SIGMOID)
    _, bits = update_position(_particle(np.zeros(n), np.full(n, 50.0), np.zeros(n)), cfg,
                              np.random.default_rng(3))
    assert bits.mean() > 0.999
    _, bits = update_position(_particle(np.zeros(n), np.zeros(n), np.zeros(n)), cfg,
                              np.random.default_rng(4))
    assert 0.47 < bits.mean() < 0.53


def _problem(radius, **fit):
    layout = build_layout(GeometryConfig(radius))
    spec = FitnessSpec(**{"sll_req_db": -30.0, "bw_req_deg": 20.0, **fit})
    return ThinningProblem(layout, spec, PatternConfig(cut_step_deg=0.1))


@pytest.fixture(scope="module")
def toy():
    problem = _problem(2.75)
    assert problem.layout.chromosome_len == 3
    return problem, exhaustive_optimum(problem)


def test_toy_optimum_reached(toy):
    problem, f_star = toy
    hits = 0
    for seed in range(100):
        r = run_pso(problem.layout, problem.spec, PsoConfig(swarm_size=16, max_iters=200, seed=seed),
                    problem.pattern_cfg, problem)
        hits += r.best_fitness == f_star
    assert hits >= 95


def test_all_zero_chromosome_is_infeasible(toy):
    problem, _ = toy
    assert problem.evaluate(np.zeros(3, np.int8))[0] == math.inf


def test_huge_threshold_returns_initial_best(toy):
    problem, _ = toy
    cfg = PsoConfig(fitness_threshold=1e300, seed=5)
    r = run_pso(problem.layout, problem.spec, cfg, problem.pattern_cfg, problem)
    assert r.iterations_used == 0 and len(r.fitness_trace) == 1
    swarm = Swarm(problem.layout, problem, cfg)
    assert r.best_fitness == min(p.p_best_f for p in swarm.particles)


@pytest.fixture(scope="module")
def mid_problem():
    return _problem(6)


def test_determinism(mid_problem):
    cfg = PsoConfig(max_iters=60, seed=42)
    a = run_pso(mid_problem.layout, mid_problem.spec, cfg, mid_problem.pattern_cfg)
    b = run_pso(mid_problem.layout, mid_problem.spec, cfg, mid_problem.pattern_cfg)
    assert a.to_dict() == b.to_dict()


@pytest.mark.parametrize("seed", range(4))
def test_trace_non_increasing(mid_problem, seed):
    r = run_pso(mid_problem.layout, mid_problem.spec, PsoConfig(max_iters=80, seed=seed),
                mid_problem.pattern_cfg, mid_problem)
    assert all(b <= a for a, b in zip(r.fitness_trace, r.fitness_trace[1:]))
    assert r.fitness_trace[-1] == r.best_fitness
    assert r.active_count == r.best_weights.sum()
    assert len(r.fitness_trace) == r.iterations_used + 1


def test_personal_best_dominance(mid_problem):
    swarm = Swarm(mid_problem.layout, mid_problem, PsoConfig(seed=9))
    visited = [[p.p_best_f] for p in swarm.particles]
    for _ in range(40):
        for i, f in enumerate(swarm.step()):
            visited[i].append(f)
        for p, seen in zip(swarm.particles, visited):
            assert p.p_best_f <= min(seen)


class _Recorder(ThinningProblem):
    def __init__(self, *a):
        super().__init__(*a)
        self.seen = []

    def evaluate(self, bits):
        self.seen.append(np.array(bits))
        return super().evaluate(bits)


def test_every_candidate_is_eightfold_symmetric(mid_problem):
    rec = _Recorder(mid_problem.layout, mid_problem.spec, mid_problem.pattern_cfg)
    run_pso(rec.layout, rec.spec, PsoConfig(max_iters=10, seed=1), rec.pattern_cfg, rec)
    lay = rec.layout
    for bits in rec.seen[::17]:
        w = expand_chromosome(lay, bits)
        active = lay.positions[w == 1]
        img = rotate(active, math.pi / 4)
        d = np.hypot(*(img[:, None] - active[None]).transpose(2, 0, 1))
        assert np.all(d.min(axis=1) < 1e-6)


def test_center_fixed(mid_problem):
    rec = _Recorder(mid_problem.layout, mid_problem.spec, mid_problem.pattern_cfg)
    run_pso(rec.layout, rec.spec, PsoConfig(max_iters=15, seed=2, center_fixed=True),
            rec.pattern_cfg, rec)
    assert all(b[-1] == 1 for b in rec.seen)


def test_sigmoid_run_and_worst_cut_mode():
    layout = build_layout(GeometryConfig(5))
    spec = FitnessSpec(-20.0, 30.0)
    pc = PatternConfig(cut_step_deg=0.2, sll_mode="worst")
    r = run_pso(layout, spec, PsoConfig(max_iters=20, seed=3, binarization=SIGMOID), pc)
    prob0 = ThinningProblem(layout, spec, PatternConfig(cut_step_deg=0.2))
    assert r.sll_db >= prob0.evaluate(r.best_chromosome)[1]


def test_result_provenance(mid_problem):
    r = run_pso(mid_problem.layout, mid_problem.spec, PsoConfig(max_iters=3, seed=11),
                mid_problem.pattern_cfg)
    d = r.to_dict()
    assert d["seed"] == 11 and d["config"]["pso"]["seed"] == 11
    assert d["config"]["fitness"]["sll_req_db"] == -30.0
    assert len(d["best_chromosome"]) == mid_problem.layout.chromosome_len
    assert isinstance(d["converged"], bool)
