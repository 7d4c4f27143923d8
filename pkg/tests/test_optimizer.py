import math

import numpy as np
import pytest
from oracles import expected_half_normal_floor, mirror_residual_ulps

from lmcma._kernels import sample_mirrored
from lmcma.bench import BenchmarkProblem, evaluate_batch, make_problem
from lmcma.exceptions import NumericalError
from lmcma.optimizer import LMCMA, OptimizerConfig, optimize, recombination_weights, stagnation_window
from lmcma.rng import RandomSource
from lmcma.selection import select_subset


def run_generations(es, problem, k, transform=None):
    for _ in range(k):
        pop = es.ask()
        f = evaluate_batch(problem, pop.x)
        es.tell(pop, f if transform is None else transform(f))


# config

def test_default_config_values():
    cfg = OptimizerConfig(128)
    assert cfg.lam == 4 + math.floor(3 * math.log(128)) == 18
    assert cfg.mu == 9 and cfg.m == 18 and cfg.n_steps == 128 and cfg.period == 4
    assert cfg.c_c == 0.5 / math.sqrt(128)
    assert cfg.c1 == 1 / (10 * math.log(129))
    assert (cfg.c_sigma, cfg.z_star, cfg.d_sigma, cfg.m_sigma) == (0.3, 0.25, 1.0, 4.0)
    assert cfg.restarts is False
    assert OptimizerConfig(100, m="2sqrt").m == 20


def test_weights():
    for mu in (1, 2, 5, 50):
        w = recombination_weights(mu)
        assert abs(w.sum() - 1.0) <= 1e-12
        assert np.all(np.diff(w) < 0)
        den = mu * math.log(mu + 1) - sum(math.log(j) for j in range(1, mu + 1))
        assert np.allclose(w, [(math.log(mu + 1) - math.log(i)) / den for i in range(1, mu + 1)],
                           rtol=1e-13)


def test_nesterov_preset():
    base, tuned = OptimizerConfig(128), OptimizerConfig(128, preset="nesterov")
    assert tuned.lam == 2 * base.lam
    assert tuned.c1 == pytest.approx(15 * base.c1, rel=1e-15)
    assert tuned.c_sigma == 0.3 / 128**2
    assert tuned.restarts is True


def test_config_validation_and_round_trip():
    with pytest.raises(ValueError):
        OptimizerConfig(1)
    with pytest.raises(ValueError):
        OptimizerConfig(10, preset="other")
    with pytest.raises(ValueError):
        OptimizerConfig(10, c1=1.0)
    with pytest.raises(ValueError):
        OptimizerConfig(10, lam=1)
    with pytest.raises(ValueError):
        OptimizerConfig(10, m=0)
    cfg = OptimizerConfig(10, lam=7, m="2sqrt", c_c=1.0)
    assert OptimizerConfig.from_dict(cfg.to_dict()) == cfg


# ask

def test_empty_store_sampling_is_sigma_times_signs():
    cfg = OptimizerConfig(100)
    es = LMCMA(cfg, np.zeros(100), 3.0, seed=5)
    pop = es.ask()
    x1 = pop.x[0]
    assert set(np.abs(x1).tolist()) == {3.0}
    assert np.linalg.norm(x1) == 30.0
    assert np.array_equal(x1, 3.0 * pop.z[0])


def test_ask_matches_reference_composition():
    """The compiled sampler consumes randomness as select_subset then rademacher_vector."""
    n = 24
    cfg = OptimizerConfig(n, lam=9)
    es = LMCMA(cfg, np.ones(n), 1.0, seed=3)
    ref = RandomSource(3)
    problem = make_problem("elli", n)
    for _ in range(40):
        store = es.store
        snapshot = (store.count, store.P.copy(), store.V.copy(), store.b.copy(), store.j_array())
        mean, sigma = es.mean.copy(), es.sigma
        pop = es.ask()
        n_sampled = (cfg.lam + 1) // 2
        Z = np.empty((n_sampled, n))
        M = np.empty(n_sampled, dtype=np.int64)
        for r in range(n_sampled):
            M[r] = select_subset(cfg.selection, snapshot[0], 2 * r, ref).m_star
            Z[r] = ref.rademacher_vector(n)
        X = sample_mirrored(mean, sigma, Z, M, *snapshot, store.a, cfg.lam)
        assert np.array_equal(X, pop.x)
        for r in range(n_sampled):
            positions = range(snapshot[0] - M[r], snapshot[0])
            assert np.array_equal(pop.x[2 * r], mean + sigma * store.az(Z[r], positions))
        es.tell(pop, evaluate_batch(problem, pop.x))


def test_mirror_identity_bitwise():
    n = 16
    es = LMCMA(OptimizerConfig(n), np.random.default_rng(0).uniform(-5, 5, n), 2.0, seed=1)
    problem = make_problem("rosen", n)
    for _ in range(30):
        pop = es.ask()
        for r in range(0, len(pop), 2):
            assert np.array_equal(pop.x[r + 1], 2.0 * pop.mean - pop.x[r])
            assert mirror_residual_ulps(pop.x[r], pop.x[r + 1], pop.mean) <= 0.5
            assert np.array_equal(pop.z[r + 1], -pop.z[r])
        es.tell(pop, evaluate_batch(problem, pop.x))


def test_odd_population_last_candidate_unpaired():
    n = 6
    es = LMCMA(OptimizerConfig(n, lam=5), np.zeros(n), 1.0, seed=2)
    pop = es.ask()
    assert pop.x.shape == (5, n)
    assert np.array_equal(pop.x[4], pop.z[4].astype(float))


def test_inner_products_per_candidate():
    n = 50
    cfg = OptimizerConfig(n)
    es = LMCMA(cfg, np.ones(n), 1.0, seed=4)
    problem = make_problem("sphere", n)
    run_generations(es, problem, cfg.m * cfg.period + 1)
    assert es.store.count == cfg.m
    non_first = []
    for _ in range(150):
        before = es.store.dot_count
        pop = es.ask()
        assert es.store.dot_count - before == pop.m_star[::2].sum()
        assert np.all(pop.m_star <= cfg.m)
        non_first.extend(pop.m_star[2::2].tolist())
        es.tell(pop, evaluate_batch(problem, pop.x))
    expected = expected_half_normal_floor(cfg.m_sigma, cap=cfg.m)
    assert len(non_first) >= 1000
    assert abs(np.mean(non_first) - expected) <= 0.1 * expected


# tell

def test_single_parent_mean_is_best():
    n = 8
    es = LMCMA(OptimizerConfig(n, mu=1), np.ones(n), 1.0, seed=0)
    pop = es.ask()
    f = evaluate_batch(make_problem("sphere", n), pop.x)
    es.tell(pop, f)
    assert np.array_equal(es.mean, pop.x[np.argmin(f)])


def test_memoryless_path():
    n = 8
    cfg = OptimizerConfig(n, c_c=1.0)
    es = LMCMA(cfg, np.ones(n), 1.5, seed=0)
    old_mean = es.mean.copy()
    pop = es.ask()
    es.tell(pop, evaluate_batch(make_problem("elli", n), pop.x))
    assert np.array_equal(es.p_c, math.sqrt(cfg.mu_w) * (es.mean - old_mean) / 1.5)


def test_fitness_ties_break_by_index():
    n = 4
    es = LMCMA(OptimizerConfig(n, lam=6, mu=1), np.zeros(n), 1.0, seed=0)
    pop = es.ask()
    es.tell(pop, np.array([3.0, 1.0, 2.0, 1.0, 1.0, 5.0]))
    assert np.array_equal(es.mean, pop.x[1])


def test_first_update_at_t_zero():
    n = 20
    es = LMCMA(OptimizerConfig(n), np.ones(n), 1.0, seed=0)
    pop = es.ask()
    es.tell(pop, evaluate_batch(make_problem("sphere", n), pop.x))
    assert es.store.count == 1
    assert np.array_equal(es.store.P[0], es.p_c)


def test_tell_validation():
    n = 5
    es = LMCMA(OptimizerConfig(n), np.zeros(n), 1.0)
    pop = es.ask()
    with pytest.raises(ValueError):
        es.tell(pop, np.zeros(3))
    with pytest.raises(ValueError):
        es.tell(pop, np.full(len(pop), np.inf))
    with pytest.raises(ValueError):
        LMCMA(OptimizerConfig(n), np.zeros(4), 1.0)
    with pytest.raises(ValueError):
        LMCMA(OptimizerConfig(n), np.zeros(n), 0.0)


def test_nan_mean_raises_numerical_error():
    n = 3
    es = LMCMA(OptimizerConfig(n), np.zeros(n), 1.0)
    pop = es.ask()
    pop.x[:] = np.nan
    with pytest.raises(NumericalError) as info:
        es.tell(pop, np.arange(float(len(pop))))
    assert "sigma" in info.value.dump


def test_state_invariants_over_run():
    n = 10
    cfg = OptimizerConfig(n)
    es = LMCMA(cfg, np.full(n, 3.0), 2.0, seed=9)
    problem = make_problem("rosen", n)
    best = math.inf
    for t in range(1, 80):
        run_generations(es, problem, 1)
        assert es.evaluations == cfg.lam * t
        assert es.sigma > 0
        assert es.best_f <= best
        best = es.best_f


def test_monotone_transform_invariance_short():
    n = 12
    problem = make_problem("rosen", n)
    a = LMCMA(OptimizerConfig(n), np.full(n, 2.0), 1.0, seed=7)
    b = LMCMA(OptimizerConfig(n), np.full(n, 2.0), 1.0, seed=7)
    for _ in range(50):
        pa, pb = a.ask(), b.ask()
        assert np.array_equal(pa.x, pb.x) and a.sigma == b.sigma
        f = evaluate_batch(problem, pa.x)
        a.tell(pa, f)
        b.tell(pb, np.exp(f / 1e3) - 7.0)


def test_checkpoint_round_trip(tmp_path):
    n = 10
    problem = make_problem("elli", n)
    es = LMCMA(OptimizerConfig(n), np.ones(n), 1.0, seed=11)
    run_generations(es, problem, 30)
    path = tmp_path / "ckpt.json"
    es.save_checkpoint(path)
    clone = LMCMA.load_checkpoint(path)
    for _ in range(30):
        pa, pb = es.ask(), clone.ask()
        assert np.array_equal(pa.x, pb.x)
        f = evaluate_batch(problem, pa.x)
        es.tell(pa, f)
        clone.tell(pb, f)
    assert es.sigma == clone.sigma and np.array_equal(es.mean, clone.mean)
    with pytest.raises(ValueError):
        LMCMA.from_dict({"format": "other"})


# driver

def test_sphere_16_reaches_target():
    rec = optimize(OptimizerConfig(16), make_problem("sphere", 16), 10**5, seed=0)
    assert rec.reason == "target" and rec.evaluations < 10**5
    assert rec.best_f <= 1e-10 and rec.success


def test_budget_of_one_generation():
    cfg = OptimizerConfig(16)
    rec = optimize(cfg, make_problem("sphere", 16), cfg.lam, seed=0)
    assert rec.reason == "budget" and rec.evaluations == cfg.lam and len(rec.rows) == 1


def test_budget_not_a_multiple_of_lambda():
    cfg = OptimizerConfig(16)
    rec = optimize(cfg, make_problem("sphere", 16), 3 * cfg.lam + 5, seed=0)
    assert rec.evaluations == 3 * cfg.lam


def test_target_in_first_generation():
    cfg = OptimizerConfig(8)
    rec = optimize(cfg, make_problem("sphere", 8), 1000, target_f=1e9, seed=0)
    assert rec.reason == "target" and rec.evaluations == cfg.lam


def test_trajectory_invariants_and_metadata():
    cfg = OptimizerConfig(10)
    rec = optimize(cfg, make_problem("rot_elli", 10, rotation_seed=3), 3000, seed=4)
    evals = [r[0] for r in rec.rows]
    best = [r[1] for r in rec.rows]
    assert all(b > a for a, b in zip(evals, evals[1:]))
    assert all(b <= a for a, b in zip(best, best[1:]))
    meta = rec.metadata
    assert meta["seed"] == 4 and meta["problem"]["rotation_seed"] == 3
    assert meta["algorithm"] == "lmcma" and meta["config"]["lam"] == cfg.lam
    assert "version" in meta


@pytest.fixture
def flat_objective(monkeypatch):
    """Every candidate scores 1, so best f never improves."""
    import lmcma.optimizer.driver as driver
    monkeypatch.setattr(driver, "evaluate_batch", lambda problem, X: np.ones(len(X)))


def test_stagnation_stop(flat_objective):
    cfg = OptimizerConfig(4)
    rec = optimize(cfg, make_problem("sphere", 4), 200_000, seed=0)
    window = stagnation_window(4, cfg.lam)
    assert window == math.ceil(10 * (4 / cfg.lam + 10))
    assert rec.reason == "stagnation"
    assert rec.evaluations == (window + 1) * cfg.lam


def test_restarts_reset_and_continue(flat_objective):
    cfg = OptimizerConfig(4, restarts=True)
    window = stagnation_window(4, cfg.lam)
    seen = []
    rec = optimize(cfg, make_problem("sphere", 4), 5 * (window + 1) * cfg.lam, seed=0,
                   on_generation=lambda es, r: seen.append((es.sigma, es.t)))
    assert rec.reason == "budget"
    # the stop check after the last generation triggers a fifth restart
    assert rec.restarts == 5
    # each restart begins a fresh optimizer at the initial step-size
    firsts = [sigma for sigma, t in seen if t == 1]
    assert firsts == [3.0] * 5


def test_non_finite_path_raises():
    n = 4
    es = LMCMA(OptimizerConfig(n), np.full(n, 0.1), 1.0, seed=0)
    pop = es.ask()
    pop.x[:] = es.mean + 1e-5
    es.sigma = 5e-324
    with pytest.raises(NumericalError) as info:
        es.tell(pop, np.arange(float(len(pop))))
    assert info.value.dump["sigma"] == 5e-324


def test_overflowing_direction_is_skipped():
    n = 4
    es = LMCMA(OptimizerConfig(n), np.full(n, 0.1), 1.0, seed=0)
    pop = es.ask()
    pop.x[:] = es.mean + 1e-10
    es.sigma = 1e-300
    es.tell(pop, np.arange(float(len(pop))))
    assert np.isfinite(es.p_c).all()
    slot = es.store.j[0]
    assert slot in es.store.inactive and es.store.b[slot] == 0.0


def test_same_seed_same_record():
    cfg = OptimizerConfig(12)
    a = optimize(cfg, make_problem("cigar", 12), 5000, seed=2)
    b = optimize(cfg, make_problem("cigar", 12), 5000, seed=2)
    assert a.rows == b.rows and a.best_x == b.best_x


def test_driver_validation():
    cfg = OptimizerConfig(8)
    with pytest.raises(ValueError):
        optimize(cfg, make_problem("sphere", 9), 1000)
    with pytest.raises(ValueError):
        optimize(cfg, make_problem("sphere", 8), cfg.lam - 1)
    with pytest.raises(ValueError):
        optimize(cfg, make_problem("sphere", 8), 1000, algorithm="bfgs")


def test_translation_contract_approximate():
    """f(x) from m0 and f(x - delta) from m0 + delta agree up to rounding."""
    n = 10
    delta = np.linspace(-0.75, 0.5, n)
    problem = make_problem("elli", n)
    a = LMCMA(OptimizerConfig(n), np.full(n, 2.0), 1.0, seed=8)
    b = LMCMA(OptimizerConfig(n), np.full(n, 2.0) + delta, 1.0, seed=8)
    for _ in range(40):
        pa, pb = a.ask(), b.ask()
        fa = evaluate_batch(problem, pa.x)
        fb = evaluate_batch(problem, pb.x - delta)
        assert np.allclose(fa, fb, rtol=1e-9, atol=0)
        assert np.array_equal(np.argsort(fa, kind="stable"), np.argsort(fb, kind="stable"))
        a.tell(pa, fa)
        b.tell(pb, fb)
    assert a.sigma == pytest.approx(b.sigma, rel=1e-12)
