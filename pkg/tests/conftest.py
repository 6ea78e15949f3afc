import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from chmopt import (  # noqa: E402
    BudgetedObjective,
    SeededRng,
    check_convergence,
    evaluate_population,
    random_population,
)
from chmopt.chm import FIT_STREAM, INIT_STREAM, PROBE_STREAM  # noqa: E402


def sphere(x):
    return sum(v * v for v in x)


def run_segmented_mirror(optimizer, objective_fn, bounds, seed, *, iterations,
                         maxfe_probing, maxfe_fit, population_size,
                         reference_value, epsilon=1e-8, patience=1):
    """Direct probing+fit segment loop with the orchestrator's stream labels.

    This is the independent twin of a single-method (k=1) orchestrated run:
    same derived randomness, same budget slices, same carryover rule, written
    without the orchestrator. Used to verify the degenerate-case equivalence.
    """
    rng = SeededRng(seed)
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    pop = random_population(population_size, bounds, rng.derive(INIT_STREAM))
    evaluate_population(pop, BudgetedObjective(objective_fn, population_size))
    best = pop.best().copy()
    history = [abs(best.cost - reference_value)]
    best_costs = []
    for iteration in range(1, iterations + 1):
        probe_obj = BudgetedObjective(objective_fn, maxfe_probing)
        probed = optimizer.run(pop.copy(), probe_obj, bounds,
                               rng.derive(PROBE_STREAM, iteration, 0))
        pre_fit_best = probed.best_cost()
        fit_obj = BudgetedObjective(objective_fn, maxfe_fit)
        fitted = optimizer.run(probed, fit_obj, bounds,
                               rng.derive(FIT_STREAM, iteration))
        fit_best = fitted.best_cost()
        pop = fitted if fit_best < pre_fit_best else probed
        if fit_best < best.cost:
            best = fitted.best().copy()
        best_costs.append(best.cost)
        history.append(abs(best.cost - reference_value))
        if check_convergence(history, epsilon, patience):
            break
    return best, pop, best_costs
