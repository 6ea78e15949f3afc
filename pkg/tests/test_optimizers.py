import math

import pytest

from chmopt import (
    BudgetedObjective,
    GaParams,
    Individual,
    Population,
    PsoParams,
    SeededRng,
    bfo_reproduce,
    blend_crossover,
    de_mutate,
    evaluate_population,
    get_benchmark,
    make_optimizer,
    pso_velocity_update,
    random_population,
    sa_accept,
    tumble_direction,
)
from chmopt.optimizers import OPTIMIZER_NAMES, BfoParams, DeParams, SaParams

from conftest import sphere


def evaluated_population(size, bounds, seed, fn=sphere):
    pop = random_population(size, bounds, SeededRng(seed))
    evaluate_population(pop, BudgetedObjective(fn, size))
    return pop


class TestDeMutate:
    def test_scaled_difference(self):
        assert de_mutate((0.0, 0.0), (1.0, 1.0), (0.0, 0.0), 0.8) == [0.8, 0.8]

    def test_equal_vectors_leave_base(self):
        assert de_mutate((2.0, 3.0), (1.5, -1.0), (1.5, -1.0), 0.7) == [2.0, 3.0]

    def test_zero_weight_leaves_base(self):
        assert de_mutate((2.0, 3.0), (9.0, 9.0), (-9.0, 0.0), 0.0) == [2.0, 3.0]


class TestPsoVelocityUpdate:
    def test_stationary_at_consensus(self):
        params = PsoParams()
        x = (1.0, 2.0)
        assert pso_velocity_update((0.0, 0.0), x, x, x, params, 0.3, 0.7) == [0.0, 0.0]

    def test_pure_inertia_decay(self):
        params = PsoParams(inertia=0.5)
        x = (0.0, 0.0)
        assert pso_velocity_update((2.0, 0.0), x, x, x, params, 0.9, 0.9) == [1.0, 0.0]

    def test_attraction_sum(self):
        params = PsoParams(inertia=0.5, cognitive=1.0, social=1.0)
        v = pso_velocity_update((0.0, 0.0), (0.0, 0.0), (1.0, 0.0), (0.0, 1.0),
                                params, 1.0, 1.0)
        assert v == [1.0, 1.0]

    def test_velocity_clipping(self):
        params = PsoParams(inertia=0.9, cognitive=2.0, social=2.0)
        v = pso_velocity_update((0.0,), (0.0,), (10.0,), (10.0,), params,
                                1.0, 1.0, v_max=(3.0,))
        assert v == [3.0]


class TestSaAccept:
    def test_improving_always_accepted(self):
        assert sa_accept(-1.0, 1e-9, 0.999999)

    def test_half_probability_boundary(self):
        t = 2.0
        delta = t * math.log(2.0)
        assert sa_accept(delta, t, 0.49)
        assert not sa_accept(delta, t, 0.51)

    def test_frozen_system_rejects_worsening(self):
        assert not sa_accept(10.0, 1e-300, 1e-9)


class TestBlendCrossover:
    def test_midpoint(self):
        child = blend_crossover((0.0, 0.0), (1.0, 1.0), 0.5, (0.5, 0.5))
        assert child == [0.5, 0.5]

    def test_extrapolation_range(self):
        child = blend_crossover((0.0,), (1.0,), 0.5, (1.5,))
        assert child == [1.5]


class TestBfoHelpers:
    def test_tumble_direction_unit_norm(self):
        rng = SeededRng(0)
        for dim in (1, 2, 5):
            d = tumble_direction(rng, dim)
            assert math.sqrt(sum(v * v for v in d)) == pytest.approx(1.0)

    def test_reproduction_duplicates_better_half(self):
        members = [Individual([float(i)], cost=c) for i, c in enumerate([1.0, 2.0, 3.0, 4.0])]
        after = bfo_reproduce(members)
        assert sorted(m.cost for m in after) == [1.0, 1.0, 2.0, 2.0]
        assert len(after) == 4

    def test_reproduction_odd_population_keeps_middle(self):
        members = [Individual([0.0], cost=c) for c in [5.0, 1.0, 3.0]]
        after = bfo_reproduce(members)
        assert sorted(m.cost for m in after) == [1.0, 1.0, 3.0]

    def test_zero_dispersal_probability_disperses_nobody(self):
        opt = make_optimizer("bfo", dispersal_probability=0.0)
        members = [Individual([0.5, 0.5], cost=0.5) for _ in range(6)]
        obj = BudgetedObjective(sphere, 100)
        count = opt._disperse(members, _tracker(members), obj, [(-1.0, 1.0)] * 2,
                              SeededRng(3))
        assert count == 0
        assert obj.used == 0

    def test_full_dispersal_replaces_everyone(self):
        opt = make_optimizer("bfo", dispersal_probability=1.0)
        members = [Individual([0.5, 0.5], cost=0.5) for _ in range(6)]
        obj = BudgetedObjective(sphere, 100)
        count = opt._disperse(members, _tracker(members), obj, [(-1.0, 1.0)] * 2,
                              SeededRng(3))
        assert count == 6
        assert obj.used == 6


def _tracker(members):
    from chmopt.optimizers import _BestTracker

    return _BestTracker(members)


class TestGaBehaviour:
    def test_identity_generation(self):
        bounds = [(-5.0, 5.0)] * 2
        pop = evaluated_population(6, bounds, 1)
        opt = make_optimizer("ga", mutation_rate=0.0, crossover_rate=0.0, elitism=6)
        out = opt.step(pop, BudgetedObjective(sphere, 100), bounds, SeededRng(2))
        assert sorted(tuple(m.position) for m in out) == sorted(tuple(m.position) for m in pop)

    def test_two_member_tournament_prefers_better(self):
        bounds = [(-5.0, 5.0)]
        pop = Population([Individual([2.0], cost=4.0), Individual([1.0], cost=1.0)])
        opt = make_optimizer("ga", mutation_rate=0.0, crossover_rate=0.0, elitism=0)
        out = opt.step(pop, BudgetedObjective(sphere, 100), bounds, SeededRng(5))
        # without crossover or mutation every child is the tournament winner
        assert all(m.position == [1.0] for m in out)

    def test_invalid_params_rejected(self):
        with pytest.raises(ValueError):
            GaParams(tournament_size=1)
        with pytest.raises(ValueError):
            GaParams(crossover_rate=1.5)


class TestParamValidation:
    def test_pso(self):
        with pytest.raises(ValueError):
            PsoParams(inertia=1.5)
        with pytest.raises(ValueError):
            PsoParams(cognitive=0.0)

    def test_sa(self):
        with pytest.raises(ValueError):
            SaParams(cooling=1.0)
        with pytest.raises(ValueError):
            SaParams(t0=-1.0)

    def test_de(self):
        with pytest.raises(ValueError):
            DeParams(weight=0.0)
        with pytest.raises(ValueError):
            DeParams(strategy="best/1/bin")

    def test_bfo(self):
        with pytest.raises(ValueError):
            BfoParams(chemotaxis_steps=0)
        with pytest.raises(ValueError):
            BfoParams(dispersal_probability=1.5)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_optimizer("cmaes")


@pytest.mark.parametrize("kind", OPTIMIZER_NAMES)
class TestRunContracts:
    bounds = [(-4.0, 4.0)] * 2

    def test_already_at_optimum_stays(self, kind):
        pop = Population([Individual([0.0, 0.0], cost=0.0) for _ in range(6)])
        out = make_optimizer(kind).run(pop, BudgetedObjective(sphere, 120),
                                       self.bounds, SeededRng(1))
        assert out.best_cost() == 0.0

    def test_used_equals_cap_when_budget_small(self, kind):
        pop = evaluated_population(8, self.bounds, 2)
        obj = BudgetedObjective(sphere, 8)
        make_optimizer(kind).run(pop, obj, self.bounds, SeededRng(3))
        assert obj.used == obj.cap

    def test_zero_budget_returns_population_unchanged(self, kind):
        pop = evaluated_population(5, self.bounds, 4)
        out = make_optimizer(kind).run(pop, BudgetedObjective(sphere, 0),
                                       self.bounds, SeededRng(5))
        assert [m.position for m in out] == [m.position for m in pop]
        assert [m.cost for m in out] == [m.cost for m in pop]

    def test_elitism_over_seeds_and_functions(self, kind):
        for name in ("matyas", "rastrigin", "rosenbrock"):
            spec = get_benchmark(name)
            for seed in range(10):
                pop = random_population(6, spec.bounds, SeededRng(seed))
                evaluate_population(pop, BudgetedObjective(spec.formula, 6))
                before = pop.best_cost()
                obj = BudgetedObjective(spec.formula, 90)
                out = make_optimizer(kind).run(pop, obj, spec.bounds,
                                               SeededRng(seed + 1000))
                assert out.best_cost() <= before
                assert obj.used <= obj.cap
                assert out.size == pop.size

    def test_outputs_within_bounds(self, kind):
        spec = get_benchmark("eggcrate")
        pop = random_population(7, spec.bounds, SeededRng(9))
        evaluate_population(pop, BudgetedObjective(spec.formula, 7))
        out = make_optimizer(kind).run(pop, BudgetedObjective(spec.formula, 150),
                                       spec.bounds, SeededRng(10))
        for m in out:
            for v, (lo, hi) in zip(m.position, spec.bounds):
                assert lo <= v <= hi

    def test_deterministic_given_seed(self, kind):
        outs = []
        for _ in range(2):
            pop = evaluated_population(6, self.bounds, 21)
            out = make_optimizer(kind).run(pop, BudgetedObjective(sphere, 100),
                                           self.bounds, SeededRng(22))
            outs.append([(tuple(m.position), m.cost) for m in out])
        assert outs[0] == outs[1]

    def test_input_population_not_mutated(self, kind):
        pop = evaluated_population(6, self.bounds, 30)
        snapshot = [(tuple(m.position), m.cost) for m in pop]
        make_optimizer(kind).run(pop, BudgetedObjective(sphere, 80),
                                 self.bounds, SeededRng(31))
        assert [(tuple(m.position), m.cost) for m in pop] == snapshot


def test_de_regression_anchor_on_matyas():
    # frozen-seed anchor: DE, population 20, cap 600 on matyas
    spec = get_benchmark("matyas")
    rng = SeededRng(42)
    pop = random_population(20, spec.bounds, rng.derive("init"))
    evaluate_population(pop, BudgetedObjective(spec.formula, 20))
    obj = BudgetedObjective(spec.formula, 600)
    out = make_optimizer("de").run(pop, obj, spec.bounds, rng.derive("run"))
    best_fitness = abs(out.best_cost() - spec.reference_value)
    assert best_fitness < 1e-3
    assert out.best_cost() == pytest.approx(3.291408095344954e-09, rel=1e-9)
    assert obj.used == 600


def test_population_transfer_round_trip():
    # export -> import preserves positions bit-exactly and order
    pop = evaluated_population(9, [(-2.0, 2.0)] * 2, 77)
    transferred = Population([m.copy() for m in pop.members])
    assert [m.position for m in transferred] == [m.position for m in pop]
    assert [m.cost for m in transferred] == [m.cost for m in pop]
