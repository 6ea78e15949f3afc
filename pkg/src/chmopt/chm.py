"""Two-phase hybrid orchestrator.

Each iteration probes every inner optimizer on an identical copy of the shared
population under a fixed per-method evaluation budget, hands the population of
the best-probing method to an extended fit run, and carries the fitted
population forward only if the fit actually improved the best cost. The loop
stops early once the best fitness converges.

Also provides the segmented single-method driver used for like-for-like
comparisons: one optimizer run in equally sized budget slices with the same
convergence cadence as the hybrid loop.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .core import (
    BudgetedObjective,
    Bounds,
    Individual,
    NonFiniteValue,
    Population,
    SeededRng,
    evaluate_population,
    random_population,
)
from .optimizers import InnerOptimizer, default_portfolio

# stream labels; anything replaying a run must derive identically
INIT_STREAM = "init"
PROBE_STREAM = "probe"
FIT_STREAM = "fit"
SEGMENT_STREAM = "segment"

RATIO_LOW = 0.2
RATIO_HIGH = 0.5


class EvaluationAborted(RuntimeError):
    """A phase hit a non-finite objective value; names phase, method, position."""

    def __init__(self, phase: str, method: str, cause: NonFiniteValue):
        super().__init__(
            f"non-finite objective value {cause.value!r} during {phase} "
            f"(method {method}) at position {cause.position!r}")
        self.phase = phase
        self.method = method
        self.position = cause.position


@dataclass
class ChmConfig:
    """Orchestrator parameters: iteration count, portfolio, budgets, stopping."""

    iterations: int = 4
    optimizers: tuple[InnerOptimizer, ...] = field(default_factory=default_portfolio)
    population_size: int = 20
    maxfe_probing: int = 300
    maxfe_fit: int = 600
    convergence_epsilon: float = 1e-8
    convergence_patience: int = 1

    def __post_init__(self):
        self.optimizers = tuple(self.optimizers)
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not self.optimizers:
            raise ValueError("at least one inner optimizer is required")
        if self.population_size < 1:
            raise ValueError("population_size must be >= 1")
        if self.maxfe_probing < 1 or self.maxfe_fit < 1:
            raise ValueError("budgets must be >= 1")
        if self.convergence_patience < 1:
            raise ValueError("convergence_patience must be >= 1")
        if len(self.optimizers) == 1:
            warnings.warn("single-optimizer configuration: hybridisation needs "
                          "at least two methods", UserWarning, stacklevel=2)
        ratio = self.maxfe_probing / self.maxfe_fit
        if not RATIO_LOW <= ratio <= RATIO_HIGH:
            warnings.warn(
                f"probing-to-fit ratio {ratio:.3f} outside the recommended "
                f"[{RATIO_LOW}, {RATIO_HIGH}] range", UserWarning, stacklevel=2)

    @property
    def k(self) -> int:
        return len(self.optimizers)

    def max_total_fe(self) -> int:
        return self.population_size + self.iterations * (
            self.k * self.maxfe_probing + self.maxfe_fit)

    def method_names(self) -> tuple[str, ...]:
        return tuple(opt.name for opt in self.optimizers)


@dataclass(frozen=True)
class ProbeResult:
    index: int
    method: str
    population: Population
    best_cost: float
    fe_used: int


@dataclass(frozen=True)
class ChmIteration:
    index: int  # 1-based
    probe_best_costs: tuple[float, ...]
    probe_fe: tuple[int, ...]
    selected: int
    selected_name: str
    fit_best_cost: float
    fit_fe: int
    carryover: bool
    fe_used: int
    best_cost: float  # best-so-far after this iteration
    best_fitness: float | None


@dataclass
class ChmTrace:
    method_names: tuple[str, ...]
    initial_best_cost: float
    initial_best_fitness: float | None
    iterations: list[ChmIteration] = field(default_factory=list)
    total_fe: int = 0
    final_best: Individual | None = None
    converged: bool = False

    def selection_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.method_names}
        for it in self.iterations:
            counts[it.selected_name] += 1
        return counts

    def selections(self) -> tuple[str, ...]:
        return tuple(it.selected_name for it in self.iterations)

    def best_fitness_history(self) -> list[float]:
        """Best fitness at init and after each iteration (None entries excluded)."""
        history = []
        if self.initial_best_fitness is not None:
            history.append(self.initial_best_fitness)
        history.extend(it.best_fitness for it in self.iterations
                       if it.best_fitness is not None)
        return history

    def to_records(self) -> list[dict]:
        """Line-oriented trace: one init record plus one record per iteration."""
        records = [{
            "kind": "init",
            "iteration": 0,
            "fe_used": self.total_fe - sum(it.fe_used for it in self.iterations),
            "best_cost": self.initial_best_cost,
            "best_fitness": self.initial_best_fitness,
        }]
        for it in self.iterations:
            records.append({
                "kind": "chm_iteration",
                "iteration": it.index,
                "probe_best_costs": list(it.probe_best_costs),
                "probe_fe": list(it.probe_fe),
                "selected": it.selected_name,
                "fit_best_cost": it.fit_best_cost,
                "fit_fe": it.fit_fe,
                "carryover": it.carryover,
                "fe_used": it.fe_used,
                "best_cost": it.best_cost,
                "best_fitness": it.best_fitness,
            })
        return records


def check_convergence(best_history, epsilon: float, patience: int) -> bool:
    """Converged once the latest best is below epsilon, or the improvement over
    the last ``patience`` entries fell below epsilon."""
    if not best_history:
        raise ValueError("best_history must be non-empty")
    if best_history[-1] < epsilon:
        return True
    if len(best_history) > patience:
        improvement = best_history[-1 - patience] - best_history[-1]
        if improvement < epsilon:
            return True
    return False


def probe_all(theta: Population, optimizers, objective_fn, maxfe_probing: int,
              bounds: Bounds, rng: SeededRng, iteration: int = 1) -> list[ProbeResult]:
    """Run every optimizer on an identical copy of ``theta`` under its own
    fresh budget. ``theta`` itself is never modified."""
    results = []
    for j, opt in enumerate(optimizers):
        obj = BudgetedObjective(objective_fn, maxfe_probing)
        stream = rng.derive(PROBE_STREAM, iteration, j)
        try:
            evolved = opt.run(theta.copy(), obj, bounds, stream)
        except NonFiniteValue as exc:
            raise EvaluationAborted("probing", opt.name, exc) from exc
        results.append(ProbeResult(j, opt.name, evolved, evolved.best_cost(), obj.used))
    return results


def _fitness_of(cost: float, reference_value: float | None) -> float | None:
    if reference_value is None:
        return None
    return abs(cost - reference_value)


def chm_run(config: ChmConfig, objective_fn, bounds: Bounds,
            seed: int | SeededRng, reference_value: float | None = None
            ) -> tuple[Individual, ChmTrace]:
    """Full orchestrated run. Returns the best individual ever observed and the
    per-iteration trace.

    ``reference_value`` is the known optimum value of the objective, if any;
    with it, convergence is checked on fitness (gap to the optimum), without
    it, on raw best cost.
    """
    rng = seed if isinstance(seed, SeededRng) else SeededRng(seed)
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    init_obj = BudgetedObjective(objective_fn, config.population_size)
    theta = random_population(config.population_size, bounds, rng.derive(INIT_STREAM))
    try:
        evaluate_population(theta, init_obj)
    except NonFiniteValue as exc:
        raise EvaluationAborted("initialization", "-", exc) from exc

    best = theta.best().copy()
    trace = ChmTrace(
        method_names=config.method_names(),
        initial_best_cost=best.cost,
        initial_best_fitness=_fitness_of(best.cost, reference_value),
    )
    trace.total_fe = init_obj.used
    convergence_metric = (trace.initial_best_fitness if reference_value is not None
                          else best.cost)
    history = [convergence_metric]

    for iteration in range(1, config.iterations + 1):
        probes = probe_all(theta, config.optimizers, objective_fn,
                           config.maxfe_probing, bounds, rng, iteration)
        selected = min(range(len(probes)), key=lambda j: probes[j].best_cost)
        winner = probes[selected]
        theta = winner.population
        pre_fit_best = winner.best_cost

        fit_obj = BudgetedObjective(objective_fn, config.maxfe_fit)
        fit_stream = rng.derive(FIT_STREAM, iteration)
        try:
            fitted = config.optimizers[selected].run(theta, fit_obj, bounds, fit_stream)
        except NonFiniteValue as exc:
            raise EvaluationAborted("fit", winner.method, exc) from exc
        fit_best = fitted.best_cost()

        carryover = fit_best < pre_fit_best
        if carryover:
            theta = fitted

        # elitism guarantees fit_best <= pre_fit_best <= previous bests, so the
        # fitted population always holds the run-wide best when it improves
        if fit_best < best.cost:
            best = fitted.best().copy()

        fe_used = sum(p.fe_used for p in probes) + fit_obj.used
        trace.total_fe += fe_used
        best_fitness = _fitness_of(best.cost, reference_value)
        trace.iterations.append(ChmIteration(
            index=iteration,
            probe_best_costs=tuple(p.best_cost for p in probes),
            probe_fe=tuple(p.fe_used for p in probes),
            selected=selected,
            selected_name=winner.method,
            fit_best_cost=fit_best,
            fit_fe=fit_obj.used,
            carryover=carryover,
            fe_used=fe_used,
            best_cost=best.cost,
            best_fitness=best_fitness,
        ))
        history.append(best_fitness if reference_value is not None else best.cost)
        if check_convergence(history, config.convergence_epsilon,
                             config.convergence_patience):
            trace.converged = True
            break

    trace.final_best = best.copy()
    return best, trace


# ---------------------------------------------------------------------------
# segmented single-method driver


@dataclass(frozen=True)
class Segment:
    index: int  # 1-based
    fe_used: int
    best_cost: float
    best_fitness: float | None


@dataclass
class SegmentedTrace:
    method_names: tuple[str, ...]
    initial_best_cost: float
    initial_best_fitness: float | None
    segments: list[Segment] = field(default_factory=list)
    total_fe: int = 0
    final_best: Individual | None = None
    converged: bool = False

    def selections(self) -> tuple[str, ...]:
        return ()

    def best_fitness_history(self) -> list[float]:
        history = []
        if self.initial_best_fitness is not None:
            history.append(self.initial_best_fitness)
        history.extend(s.best_fitness for s in self.segments
                       if s.best_fitness is not None)
        return history

    def to_records(self) -> list[dict]:
        records = [{
            "kind": "init",
            "iteration": 0,
            "fe_used": self.total_fe - sum(s.fe_used for s in self.segments),
            "best_cost": self.initial_best_cost,
            "best_fitness": self.initial_best_fitness,
        }]
        for s in self.segments:
            records.append({
                "kind": "segment",
                "iteration": s.index,
                "selected": self.method_names[0],
                "fe_used": s.fe_used,
                "best_cost": s.best_cost,
                "best_fitness": s.best_fitness,
            })
        return records


def run_segmented(optimizer: InnerOptimizer, objective_fn, bounds: Bounds,
                  seed: int | SeededRng, *, segments: int, segment_fe: int,
                  population_size: int, reference_value: float | None = None,
                  convergence_epsilon: float = 1e-8, convergence_patience: int = 1
                  ) -> tuple[Individual, SegmentedTrace]:
    """One optimizer run as ``segments`` consecutive budget slices with the
    convergence check applied at each slice boundary. Gives single methods the
    same total budget and the same stopping cadence as an orchestrated run."""
    rng = seed if isinstance(seed, SeededRng) else SeededRng(seed)
    bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
    init_obj = BudgetedObjective(objective_fn, population_size)
    pop = random_population(population_size, bounds, rng.derive(INIT_STREAM))
    try:
        evaluate_population(pop, init_obj)
    except NonFiniteValue as exc:
        raise EvaluationAborted("initialization", optimizer.name, exc) from exc

    best = pop.best().copy()
    trace = SegmentedTrace(
        method_names=(optimizer.name,),
        initial_best_cost=best.cost,
        initial_best_fitness=_fitness_of(best.cost, reference_value),
    )
    trace.total_fe = init_obj.used
    history = [trace.initial_best_fitness if reference_value is not None else best.cost]

    for index in range(1, segments + 1):
        obj = BudgetedObjective(objective_fn, segment_fe)
        stream = rng.derive(SEGMENT_STREAM, index)
        try:
            pop = optimizer.run(pop, obj, bounds, stream)
        except NonFiniteValue as exc:
            raise EvaluationAborted(f"segment {index}", optimizer.name, exc) from exc
        if pop.best_cost() < best.cost:
            best = pop.best().copy()
        trace.total_fe += obj.used
        best_fitness = _fitness_of(best.cost, reference_value)
        trace.segments.append(Segment(index, obj.used, best.cost, best_fitness))
        history.append(best_fitness if reference_value is not None else best.cost)
        if check_convergence(history, convergence_epsilon, convergence_patience):
            trace.converged = True
            break

    trace.final_best = best.copy()
    return best, trace
