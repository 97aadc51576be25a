"""One simulation run: state assembly and the phase-ordered tick loop.

Phases inside :func:`tick`, in order:

1. shuffle the working agents
2. each worker moves, harvests (scaled by productivity when decay is on)
   and pays tax and fee into the fund
3. each retiree eats from the fund, then from savings
4. each worker eats its metabolism; with social services a starving worker
   is topped up from the fund
5. starvation deaths (wealth <= 0)
6. aging, then old-age deaths (age > max_age)
7. retirement of workers at or beyond the retirement age
8. reproduction of eligible workers
9. sugar growback
10. indicators; the tick counter advances

Phases 7 and 8 swap when ``retire_before_breed`` is off. Ticks are counted
from 1: metrics for tick ``t`` describe the world after ``t`` steps, when
every first-generation survivor is ``t`` ticks old.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .landscape import Landscape, generate_default, load_map, sight_stack
from .metrics import TickMetrics, tick_indicators
from .pension import PensionFund, k_contribution, k_pension, k_welfare
from .population import AgentTable, Occupancy, k_choose_move, k_reproduce, spawn_initial
from .productivity import ProductivityCurve, build_akima
from .rng import RngState, k_shuffle, new_rng
from .scenario import ScenarioSpec

LEDGER_TOL = 1e-9

# slots of the per-tick stats vector filled by the kernel
(S_WEALTH_START, S_INCOME, S_PAID, S_FROM_SAVINGS, S_METABOLISM, S_WELFARE, S_REMOVED,
 S_WEALTH_FED, S_WEALTH_PRE_BIRTH, S_WEALTH_POST_BIRTH, S_BIRTHS, S_SKIPPED, S_STARVED_WORKING,
 S_STARVED_RETIRED, S_OLD_AGE, S_RETIREMENTS, N_STATS) = range(17)


class LedgerError(AssertionError):
    pass


@dataclass
class Diagnostics:
    births: int = 0
    skipped_births: int = 0
    deaths_starvation_working: int = 0
    deaths_starvation_retired: int = 0
    deaths_old_age: int = 0
    retirements: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SimState:
    scenario: ScenarioSpec
    seed: int
    landscape: Landscape
    agents: AgentTable
    working: np.ndarray
    retired: np.ndarray
    occupancy: Occupancy
    fund: PensionFund
    curve: ProductivityCurve
    productivity_table: np.ndarray
    rng: RngState
    tick: int = 0
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    check_ledgers: bool = True

    @property
    def population(self) -> int:
        return len(self.working) + len(self.retired)

    def working_agents(self):
        return [self.agents[int(i)] for i in self.working]

    def retired_agents(self):
        return [self.agents[int(i)] for i in self.retired]

    def total_wealth(self) -> float:
        w = self.agents.wealth
        return float(w[self.working].sum() + w[self.retired].sum())

    def snapshot(self) -> tuple:
        """Comparable view of the full state, for determinism checks."""
        return (self.tick, self.landscape.level.tobytes(), self.landscape.capacity.tobytes(),
                self.working.tobytes(), self.retired.tobytes(),
                self.agents.rows(np.arange(self.agents.size)), self.occupancy.grid.tobytes(),
                self.fund.ledger.tobytes(), self.rng.state(),
                tuple(sorted(self.diagnostics.as_dict().items())))

    def check_invariants(self) -> None:
        t, grid = self.agents, self.occupancy.grid
        w, r = self.working, self.retired
        if np.intersect1d(w, r).size:
            raise LedgerError("an agent is both working and retired")
        if np.unique(w).size != w.size or np.unique(r).size != r.size:
            raise LedgerError("an agent is listed twice")
        cells = t.cell[w]
        if (cells < 0).any() or not np.array_equal(grid[cells], w):
            raise LedgerError("working agents and occupancy disagree")
        if int((grid >= 0).sum()) != w.size:
            raise LedgerError("occupancy holds agents that are not working")
        if t.retired[w].any() or not t.retired[r].all() or (t.cell[r] >= 0).any():
            raise LedgerError("retirement flags inconsistent with partitions")
        if (t.wealth[w] <= 0).any() or (t.wealth[r] <= 0).any():
            raise LedgerError("a living agent has no wealth")
        if (t.retired[r] & (t.age[r] < self.scenario.policy.retirement_age)).any():
            raise LedgerError("retired agent below retirement age")
        lv, cap = self.landscape.level, self.landscape.capacity
        if (lv < 0).any() or (lv > cap).any():
            raise LedgerError("cell level outside [0, capacity]")


@dataclass
class RunResult:
    scenario: ScenarioSpec
    seed: int
    ticks: int
    series: list[TickMetrics]
    fund: PensionFund
    diagnostics: Diagnostics
    final_working: int
    final_retired: int
    initial_population: int
    initial_mean_vision: float | None = None
    initial_mean_metabolism: float | None = None

    def column(self, name: str) -> list:
        return [getattr(m, name) for m in self.series]


def build_landscape(scenario: ScenarioSpec) -> Landscape:
    if scenario.map_text is not None:
        return load_map(scenario.map_text, scenario.growback_rate)
    return generate_default(scenario.width, scenario.height, scenario.growback_rate)


def productivity_table(curve: ProductivityCurve, max_age: int) -> np.ndarray:
    """Productivity for every integer age 0..max_age."""
    return np.array([curve(a) for a in range(max_age + 1)], dtype=np.float64)


def init_run(scenario: ScenarioSpec, seed: int, check_ledgers: bool = True) -> SimState:
    rng = new_rng(seed)
    landscape = build_landscape(scenario)
    table, occupancy = spawn_initial(scenario.initial_population, scenario, landscape, rng)
    curve = build_akima(scenario.knots)
    return SimState(
        scenario=scenario,
        seed=seed,
        landscape=landscape,
        agents=table,
        working=np.arange(table.size, dtype=np.int64),
        retired=np.empty(0, dtype=np.int64),
        occupancy=occupancy,
        fund=PensionFund(),
        curve=curve,
        productivity_table=productivity_table(curve, int(scenario.max_age_bound()) + 1),
        rng=rng,
        check_ledgers=check_ledgers,
    )


@njit(cache=True)
def _wealth_sum(wealth, ids, n):
    total = 0.0
    for q in range(n):
        total += wealth[ids[q]]
    return total


@njit(cache=True)
def k_tick(working, retired, cell, vision, metab, wealth, age, max_age, n_children, atr,
           has_bred, is_retired, first_gen, alive, next_id,
           level, capacity, growback, occ, sight_c, sight_d, width, height, s, fund,
           tax_pct, fee, proportional_fee, taxed, decay, leftover, prod_table, social,
           retirement_age, retire_first, d_max_age, d_children, d_atr, stats):
    """Phases 1-9 of one tick; returns ``(working, retired, next_id)``."""
    n_w = working.shape[0]
    n_r = retired.shape[0]
    stats[S_WEALTH_START] = _wealth_sum(wealth, working, n_w) + _wealth_sum(wealth, retired, n_r)

    # 1-2: move, harvest, contribute
    k_shuffle(s, working, n_w)
    ties = np.empty(sight_c.shape[2], dtype=np.int64)
    last_age = prod_table.shape[0] - 1
    gdp = 0.0
    paid_total = 0.0
    for q in range(n_w):
        a = working[q]
        here = cell[a]
        tgt = k_choose_move(here, vision[a], level, occ, sight_c, sight_d, s, ties)
        if tgt != here:
            occ[here] = -1
            occ[tgt] = a
            cell[a] = tgt
        if decay:
            income = level[tgt] * prod_table[min(age[a], last_age)]
            if leftover:
                level[tgt] -= income
            else:
                level[tgt] = 0.0
        else:
            income = level[tgt]
            level[tgt] = 0.0
        wealth[a] += income
        gdp += income
        if taxed:
            paid = k_contribution(income, wealth[a], tax_pct, fee, proportional_fee, fund)
            wealth[a] -= paid
            paid_total += paid
    stats[S_INCOME] = gdp
    stats[S_PAID] = paid_total

    # 3: retirees eat from the fund, then from savings
    from_savings = 0.0
    for q in range(n_r):
        a = retired[q]
        own = k_pension(float(metab[a]), fund)[1]
        wealth[a] -= own
        from_savings += own
    stats[S_FROM_SAVINGS] = from_savings

    # 4: workers eat; welfare for the starving
    eaten = 0.0
    welfare = 0.0
    for q in range(n_w):
        a = working[q]
        wealth[a] -= metab[a]
        eaten += metab[a]
        if social and wealth[a] <= 0.0:
            g = k_welfare(wealth[a], float(metab[a]), fund)
            wealth[a] += g
            welfare += g
    stats[S_METABOLISM] = eaten
    stats[S_WELFARE] = welfare

    # 5: starvation
    removed = 0.0
    new_w = np.empty(n_w, dtype=np.int64)
    nw = 0
    for q in range(n_w):
        a = working[q]
        if wealth[a] <= 0.0:
            removed += wealth[a]
            occ[cell[a]] = -1
            cell[a] = -1
            alive[a] = False
            stats[S_STARVED_WORKING] += 1
        else:
            new_w[nw] = a
            nw += 1
    new_r = np.empty(n_r + n_w, dtype=np.int64)
    nr = 0
    for q in range(n_r):
        a = retired[q]
        if wealth[a] <= 0.0:
            removed += wealth[a]
            alive[a] = False
            stats[S_STARVED_RETIRED] += 1
        else:
            new_r[nr] = a
            nr += 1
    stats[S_REMOVED] = removed
    stats[S_WEALTH_FED] = _wealth_sum(wealth, new_w, nw) + _wealth_sum(wealth, new_r, nr)

    # 6: aging, old age
    k = 0
    for q in range(nw):
        a = new_w[q]
        age[a] += 1
        if age[a] > max_age[a]:
            occ[cell[a]] = -1
            cell[a] = -1
            alive[a] = False
            stats[S_OLD_AGE] += 1
        else:
            new_w[k] = a
            k += 1
    nw = k
    k = 0
    for q in range(nr):
        a = new_r[q]
        age[a] += 1
        if age[a] > max_age[a]:
            alive[a] = False
            stats[S_OLD_AGE] += 1
        else:
            new_r[k] = a
            k += 1
    nr = k
    stats[S_WEALTH_PRE_BIRTH] = _wealth_sum(wealth, new_w, nw) + _wealth_sum(wealth, new_r, nr)

    # 7-8: retirement and reproduction
    n_kids = 0
    for q in range(nw):
        n_kids += max(n_children[new_w[q]], 0)
    out_w = np.empty(nw + n_kids, dtype=np.int64)
    kids = np.empty(max(n_kids, 1), dtype=np.int64)
    for phase in range(2):
        do_retire = (phase == 0) == retire_first
        if do_retire:
            k = 0
            for q in range(nw):
                a = new_w[q]
                if age[a] >= retirement_age:
                    occ[cell[a]] = -1
                    cell[a] = -1
                    is_retired[a] = True
                    new_r[nr] = a
                    nr += 1
                    stats[S_RETIREMENTS] += 1
                else:
                    new_w[k] = a
                    k += 1
            nw = k
        else:
            for q in range(nw):
                out_w[q] = new_w[q]
            m = nw
            for q in range(nw):
                a = new_w[q]
                if age[a] == atr[a] and not has_bred[a] and not is_retired[a]:
                    born, skipped, next_id = k_reproduce(
                        a, next_id, cell, vision, metab, wealth, age, max_age, n_children, atr,
                        has_bred, is_retired, first_gen, alive, occ, width, height, s,
                        d_max_age, d_children, d_atr, kids)
                    for b in range(born):
                        out_w[m] = kids[b]
                        m += 1
                    stats[S_BIRTHS] += born
                    stats[S_SKIPPED] += skipped
            if m > new_w.shape[0]:
                new_w = np.empty(m, dtype=np.int64)
            for q in range(m):
                new_w[q] = out_w[q]
            nw = m
    stats[S_WEALTH_POST_BIRTH] = _wealth_sum(wealth, new_w, nw) + _wealth_sum(wealth, new_r, nr)

    # 9: growback
    for c in range(level.shape[0]):
        v = level[c] + growback
        cap = capacity[c]
        level[c] = v if v < cap else cap

    return new_w[:nw].copy(), new_r[:nr].copy(), next_id


def _close(a: float, b: float, scale: float) -> bool:
    return abs(a - b) <= LEDGER_TOL * max(1.0, scale)


def _check_ledgers(state: SimState, st: np.ndarray) -> None:
    expected = (st[S_WEALTH_START] + st[S_INCOME] - st[S_PAID] - st[S_FROM_SAVINGS]
                - st[S_METABOLISM] + st[S_WELFARE] - st[S_REMOVED])
    scale = max(abs(st[S_WEALTH_START]), abs(st[S_WEALTH_FED]), st[S_INCOME], st[S_METABOLISM])
    if not _close(st[S_WEALTH_FED], expected, scale):
        raise LedgerError(f"tick {state.tick + 1}: wealth ledger off by {st[S_WEALTH_FED] - expected!r}")
    if not _close(st[S_WEALTH_POST_BIRTH], st[S_WEALTH_PRE_BIRTH], abs(st[S_WEALTH_PRE_BIRTH])):
        raise LedgerError(f"tick {state.tick + 1}: inheritance changed total wealth by "
                          f"{st[S_WEALTH_POST_BIRTH] - st[S_WEALTH_PRE_BIRTH]!r}")
    state.fund.check()
    state.check_invariants()


def tick(state: SimState) -> TickMetrics:
    scen = state.scenario
    policy = scen.policy
    t = state.agents
    land = state.landscape
    # room for every child any worker could have this tick
    t.ensure(t.size + int(np.maximum(t.n_children_target[state.working], 0).sum()) + 1)
    sight_c, sight_d = sight_stack(land.width, land.height, max(scen.max_vision(), 1))
    st = np.zeros(N_STATS)
    working, retired, next_id = k_tick(
        state.working, state.retired, t.cell, t.vision, t.metabolism, t.wealth, t.age, t.max_age,
        t.n_children_target, t.age_to_reproduce, t.has_bred, t.retired, t.first_generation, t.alive,
        t.size, land.level, land.capacity, land.growback_rate, state.occupancy.grid, sight_c, sight_d,
        land.width, land.height, state.rng.s, state.fund.ledger,
        float(policy.pension_tax_pct), float(policy.fixed_fee), policy.fixed_fee_mode == "proportional",
        policy.pension_tax_pct != 0 or policy.fixed_fee != 0,
        policy.productivity_decay, scen.leftover_stays, state.productivity_table, policy.social_services,
        policy.retirement_age, scen.retire_before_breed,
        scen.max_age.encode(), scen.children.encode(), scen.trait("age_to_reproduce").encode(), st)
    state.working, state.retired, t.size = working, retired, int(next_id)

    d = state.diagnostics
    d.births += int(st[S_BIRTHS])
    d.skipped_births += int(st[S_SKIPPED])
    d.deaths_starvation_working += int(st[S_STARVED_WORKING])
    d.deaths_starvation_retired += int(st[S_STARVED_RETIRED])
    d.deaths_old_age += int(st[S_OLD_AGE])
    d.retirements += int(st[S_RETIREMENTS])
    if state.check_ledgers:
        _check_ledgers(state, st)

    state.tick += 1
    return tick_indicators(state.tick, t, working, retired, state.fund.balance, st[S_INCOME])


def run(scenario: ScenarioSpec, ticks: int, seed: int, check_ledgers: bool = True) -> RunResult:
    if ticks < 1:
        raise ValueError("ticks must be at least 1")
    state = init_run(scenario, seed, check_ledgers)
    t = state.agents
    initial = state.population
    v0 = float(t.vision[state.working].mean()) if initial else None
    m0 = float(t.metabolism[state.working].mean()) if initial else None
    series = [tick(state) for _ in range(ticks)]
    return RunResult(
        scenario=scenario,
        seed=seed,
        ticks=ticks,
        series=series,
        fund=state.fund,
        diagnostics=state.diagnostics,
        final_working=len(state.working),
        final_retired=len(state.retired),
        initial_population=initial,
        initial_mean_vision=v0,
        initial_mean_metabolism=m0,
    )
