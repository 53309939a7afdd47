"""Registered experiments and their fixed CSV schemas.

Each experiment maps a configuration to a SeriesTable plus a small
summary dict.  Solver divergence inside the solar run is a recordable
outcome: the rows collected before the failure are returned and the
result is flagged, so the caller can still write a partial CSV.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import lowrank, oscillatory, symplectic
from ..errors import ContractViolationError, InadmissibleStepError, SolverDivergenceError
from ..models import (
    make_fpu_chain,
    make_kepler,
    make_klein_gordon,
    make_outer_solar_system,
)
from ..models.simple import angular_momentum_2d
from ..models.solar import heliocentric_distances
from ..models.systems import oscillatory_energies
from ..series import SeriesTable
from .convergence import KEPLER_METHODS, LOWRANK_METHODS, convergence_table, observed_order

TRIG_METHODS = tuple(sorted(oscillatory.FILTERS))
RANK_METHODS = ("ksl", "ksl-strang")


@dataclass
class ExperimentConfig:
    experiment: str
    method: Optional[str]
    h: float
    t_end: float
    record_every: int = 1
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ContractViolationError(
                f"unknown experiment {self.experiment!r}; known: {sorted(EXPERIMENTS)}"
            )
        spec = EXPERIMENTS[self.experiment]
        if spec.methods and self.method not in spec.methods:
            raise ContractViolationError(
                f"method {self.method!r} not valid for {self.experiment}; use one of {spec.methods}"
            )
        if not (float(self.h) > 0.0 and float(self.t_end) > 0.0):
            raise ContractViolationError(f"h and t_end must be positive, got {self.h}, {self.t_end}")
        if int(self.record_every) < 1:
            raise ContractViolationError(f"record_every must be >= 1, got {self.record_every}")
        unknown = set(self.params) - set(spec.params)
        if unknown:
            raise ContractViolationError(
                f"unknown parameter(s) {sorted(unknown)} for {self.experiment}; "
                f"known: {sorted(spec.params)}"
            )
        merged = dict(spec.params)
        for key, value in self.params.items():
            default = merged[key]
            if isinstance(default, int) and not isinstance(default, bool):
                merged[key] = int(value)
            elif isinstance(default, float):
                merged[key] = float(value)
            else:
                merged[key] = str(value)
        self.params = merged
        self.h = float(self.h)
        self.t_end = float(self.t_end)
        self.record_every = int(self.record_every)
        self.seed = int(self.seed)


@dataclass
class ExperimentResult:
    table: SeriesTable
    summary: dict
    diverged: bool = False


def _energy_columns(records, eval_H):
    h_values = np.array([eval_H(state.p, state.q) for _, state in records])
    h0 = h_values[0]
    rel = (h_values - h0) / abs(h0)
    return h_values, rel


def _run_solar(cfg: ExperimentConfig) -> ExperimentResult:
    sys, y0, data = make_outer_solar_system()
    stepper = symplectic.StepperConfig(step_size=cfg.h)
    diverged = False
    summary = {}
    try:
        records = symplectic.integrate(sys, cfg.method, stepper, y0, cfg.t_end,
                                       record_every=cfg.record_every)
    except SolverDivergenceError as exc:
        records = exc.records
        diverged = True
        summary["diverged_at_step"] = exc.step_index
    table = SeriesTable(["t", "H", "rel_H_err", "r_J", "r_S", "r_U", "r_N", "r_P"])
    h_vals, rel = _energy_columns(records, sys.eval_H)
    for (t, state), h_val, r in zip(records, h_vals, rel):
        table.append([t, h_val, r, *heliocentric_distances(data, state)])
    summary["steps"] = int(round(cfg.t_end / cfg.h)) if not diverged else summary["diverged_at_step"]
    summary["max_rel_H_err"] = float(np.max(np.abs(rel)))
    summary["headline"] = f"max_rel_H_err={summary['max_rel_H_err']:.6g}"
    return ExperimentResult(table, summary, diverged)


def _run_kepler_longtime(cfg: ExperimentConfig) -> ExperimentResult:
    sys, y0 = make_kepler(cfg.params["eccentricity"])
    solver = "newton" if cfg.method == "implicit-euler" else "fixed-point"
    stepper = symplectic.StepperConfig(step_size=cfg.h, solver=solver)
    records = symplectic.integrate(sys, cfg.method, stepper, y0, cfg.t_end,
                                   record_every=cfg.record_every)
    table = SeriesTable(["t", "H", "rel_H_err", "L", "L_drift"])
    h_vals, rel = _energy_columns(records, sys.eval_H)
    l0 = angular_momentum_2d(records[0][1])
    max_l_drift = 0.0
    for (t, state), h_val, r in zip(records, h_vals, rel):
        ell = angular_momentum_2d(state)
        max_l_drift = max(max_l_drift, abs(ell - l0))
        table.append([t, h_val, r, ell, ell - l0])
    summary = {
        "steps": int(round(cfg.t_end / cfg.h)),
        "max_rel_H_err": float(np.max(np.abs(rel))),
        "max_L_drift": max_l_drift,
        "headline": f"max_rel_H_err={np.max(np.abs(rel)):.6g} max_L_drift={max_l_drift:.3g}",
    }
    return ExperimentResult(table, summary)


def _run_fpu_exchange(cfg: ExperimentConfig) -> ExperimentResult:
    m = cfg.params["m"]
    table = oscillatory.run_energy_exchange_experiment(
        m, cfg.params["omega"], cfg.h, cfg.t_end,
        filters=oscillatory.FILTERS[cfg.method](),
        record_every=cfg.record_every,
    )
    h_omega = table.column("H_omega")
    swings = [np.max(np.abs(table.column(f"E_{j}") - table.column(f"E_{j}")[0]))
              for j in range(1, m + 1)]
    summary = {
        "steps": int(round(cfg.t_end / cfg.h)),
        "max_rel_H_err": float(np.max(np.abs(table.column("H_rel_drift")))),
        "h_omega_drift": float(np.max(np.abs(h_omega - h_omega[0]))),
        "max_mode_swing": float(max(swings)),
        "headline": f"max_mode_swing={max(swings):.3g} h_omega_drift={np.max(np.abs(h_omega - h_omega[0])):.3g}",
    }
    return ExperimentResult(table, summary)


def _run_fpu_resonance_scan(cfg: ExperimentConfig) -> ExperimentResult:
    sys, _ = make_fpu_chain(cfg.params["m"], cfg.params["omega"])
    h_grid = np.linspace(cfg.params["h_min"], cfg.params["h_max"], cfg.params["n_points"])
    table = SeriesTable(["h", "h_omega", "freq_distance", "threshold", "admissible", "n_near_pairs"])
    n_admissible = 0
    for h in h_grid:
        report = oscillatory.resonance_report(sys, float(h))
        table.append([
            h,
            float(np.max(report.h_omega)) if report.h_omega.size else 0.0,
            float(np.min(report.freq_distances)) if report.freq_distances.size else float("inf"),
            report.threshold,
            1.0 if report.admissible else 0.0,
            float(len(report.near_resonant_pairs)),
        ])
        n_admissible += int(report.admissible)
    summary = {
        "steps": len(h_grid),
        "n_admissible": n_admissible,
        "headline": f"admissible={n_admissible}/{len(h_grid)}",
    }
    return ExperimentResult(table, summary)


def _run_klein_gordon(cfg: ExperimentConfig) -> ExperimentResult:
    n_modes = cfg.params["modes"]
    sys, y0 = make_klein_gordon(n_modes, cfg.params["rho"], cfg.params["eps"])
    report = oscillatory.resonance_report(sys, cfg.h)
    if not report.admissible:
        raise InadmissibleStepError(
            f"step size {cfg.h} is resonant for the spectral truncation", report=report
        )
    records = oscillatory.integrate_trigonometric(
        sys, oscillatory.FILTERS[cfg.method](), cfg.h, y0, cfg.t_end,
        record_every=cfg.record_every,
    )
    columns = ["t"] + [f"E_{j}" for j in range(n_modes + 1)] + ["H_omega", "H_slow", "H", "H_rel_drift"]
    table = SeriesTable(columns)
    h0 = None
    for t, state in records:
        e = oscillatory_energies(sys, state)
        if h0 is None:
            h0 = e.h_total
        table.append([t, *e.mode_energies, e.h_omega, e.h_slow, e.h_total,
                      (e.h_total - h0) / abs(h0)])
    slope = mode_decay_slope(table, len(table) - 1, j_max=min(10, n_modes))
    summary = {
        "steps": int(round(cfg.t_end / cfg.h)),
        "max_rel_H_err": float(np.max(np.abs(table.column("H_rel_drift")))),
        "final_decay_slope": slope,
        "headline": f"decay_slope={slope:.3g} max_rel_H_err={np.max(np.abs(table.column('H_rel_drift'))):.3g}",
    }
    return ExperimentResult(table, summary)


def mode_decay_slope(table: SeriesTable, row_index, j_min=2, j_max=10) -> float:
    """Least-squares slope of log E_j versus mode number j at one row."""
    j_values = np.arange(j_min, j_max + 1)
    energies = np.array([table.rows[row_index][table.columns.index(f"E_{j}")] for j in j_values])
    if np.any(energies <= 0.0):
        raise ContractViolationError("mode energies must be positive to fit a decay slope")
    return float(np.polyfit(j_values, np.log(energies), 1)[0])


def _run_lowrank_exactness(cfg: ExperimentConfig) -> ExperimentResult:
    method = {"ksl": "lie", "ksl-strang": "strang"}[cfg.method]
    substeps = cfg.params["substeps"]
    runs = {}
    for label, diag in (("rank1", [1.0]), ("rank3", [1.0, 0.5, 0.25])):
        flow = lowrank.rotating_flow(diag, m=12, n=10, seed=cfg.seed, y_dependent=False)
        y0 = lowrank.factorize(flow.exact_A(0.0), len(diag))
        runs[label] = lowrank.integrate_lowrank(
            flow, y0, 0.0, cfg.t_end, cfg.h, method=method,
            substeps=substeps, record_every=cfg.record_every,
        )
    table = SeriesTable(["t", "error_rank1", "best_rank1", "error_rank3", "best_rank3"])
    for rec1, rec3 in zip(runs["rank1"], runs["rank3"]):
        table.append([rec1.t, rec1.error, rec1.best_error, rec3.error, rec3.best_error])
    summary = {
        "steps": int(round(cfg.t_end / cfg.h)),
        "final_error_rank1": runs["rank1"][-1].error,
        "final_error_rank3": runs["rank3"][-1].error,
        "headline": (f"final_error_rank1={runs['rank1'][-1].error:.3g} "
                     f"final_error_rank3={runs['rank3'][-1].error:.3g}"),
    }
    return ExperimentResult(table, summary)


def _run_lowrank_robustness(cfg: ExperimentConfig) -> ExperimentResult:
    floors = [int(x) for x in str(cfg.params["floors"]).split(",") if x.strip()]
    table = lowrank.robustness_benchmark(
        sv_floor_exponents=floors,
        rank=cfg.params["rank"],
        h=cfg.h,
        t_end=cfg.t_end,
        substeps=cfg.params["substeps"],
        seed=cfg.seed,
        tail_scale=cfg.params["tail_scale"],
        speed=cfg.params["speed"],
    )
    envelope_ok = bool(np.all(table.column("within_envelope") == 1.0))
    summary = {
        "steps": int(round(cfg.t_end / cfg.h)) * len(floors),
        "max_ksl_error": float(np.max(table.column("ksl_error"))),
        "all_within_envelope": envelope_ok,
        "headline": (f"max_ksl_error={np.max(table.column('ksl_error')):.3g} "
                     f"envelope={'ok' if envelope_ok else 'violated'}"),
    }
    return ExperimentResult(table, summary)


def _run_convergence_orders(cfg: ExperimentConfig) -> ExperimentResult:
    levels = cfg.params["levels"]
    if levels < 3:
        raise ContractViolationError(f"levels must be >= 3, got {levels}")
    method_list = list(KEPLER_METHODS) + list(LOWRANK_METHODS)
    table = SeriesTable(["method_index", "h", "error", "order"])
    orders = {}
    for index, method in enumerate(method_list):
        if method in KEPLER_METHODS:
            h_list = [cfg.params["kepler_h0"] * 0.5**k for k in range(levels)]
            sub = convergence_table("kepler", method, h_list, t_end=cfg.t_end)
        else:
            h_list = [cfg.params["lowrank_h0"] * 0.5**k for k in range(levels)]
            sub = convergence_table("lowrank-rotating", method, h_list,
                                    t_end=cfg.t_end, substeps=cfg.params["substeps"],
                                    seed=cfg.seed)
        orders[method] = observed_order(sub)
        for row in sub.rows:
            table.append([float(index), *row])
    summary = {
        "steps": levels * len(method_list),
        "orders": {k: round(v, 3) for k, v in orders.items()},
        "headline": " ".join(f"{k}={v:.2f}" for k, v in orders.items()),
    }
    return ExperimentResult(table, summary)


@dataclass
class ExperimentSpec:
    runner: Callable
    methods: tuple  # empty when the experiment takes no method
    defaults: dict  # method, h, t_end, record_every
    params: dict  # model parameters with their default values
    description: str


EXPERIMENTS = {
    "solar": ExperimentSpec(
        runner=_run_solar,
        methods=KEPLER_METHODS,
        defaults={"method": "symplectic-euler-qp", "h": 100.0, "t_end": 200000.0, "record_every": 10},
        params={},
        description="outer solar system energy drift and heliocentric distances",
    ),
    "kepler-longtime": ExperimentSpec(
        runner=_run_kepler_longtime,
        methods=KEPLER_METHODS,
        defaults={"method": "stormer-verlet", "h": 0.05, "t_end": 1000.0, "record_every": 10},
        params={"eccentricity": 0.6},
        description="two-body problem: energy and angular momentum over many periods",
    ),
    "fpu-exchange": ExperimentSpec(
        runner=_run_fpu_exchange,
        methods=TRIG_METHODS,
        defaults={"method": "trig-mollified", "h": 0.02, "t_end": 200.0, "record_every": 5},
        params={"m": 3, "omega": 50.0},
        description="stiff spring chain: slow energy exchange among fast modes",
    ),
    "fpu-resonance-scan": ExperimentSpec(
        runner=_run_fpu_resonance_scan,
        methods=(),
        defaults={"method": None, "h": 0.02, "t_end": 1.0, "record_every": 1},
        params={"m": 3, "omega": 50.0, "h_min": 0.005, "h_max": 0.13, "n_points": 126},
        description="step-size admissibility sweep for the spring chain",
    ),
    "klein-gordon-decay": ExperimentSpec(
        runner=_run_klein_gordon,
        methods=TRIG_METHODS,
        defaults={"method": "trig-mollified", "h": 0.05, "t_end": 100.0, "record_every": 10},
        params={"modes": 32, "rho": 0.5, "eps": 0.1},
        description="nonlinear wave truncation: geometric decay of mode energies",
    ),
    "lowrank-exactness": ExperimentSpec(
        runner=_run_lowrank_exactness,
        methods=RANK_METHODS,
        defaults={"method": "ksl", "h": 0.05, "t_end": 1.0, "record_every": 1},
        params={"substeps": 10},
        description="splitting integrator on exactly low-rank solution families",
    ),
    "lowrank-robustness": ExperimentSpec(
        runner=_run_lowrank_robustness,
        methods=RANK_METHODS,
        defaults={"method": "ksl", "h": 0.01, "t_end": 1.0, "record_every": 1},
        params={"rank": 8, "floors": "10,20,30,40", "tail_scale": 1.0, "substeps": 10,
                "speed": 40.0},
        description="error versus singular-value floor, with naive gauge contrast",
    ),
    "convergence-orders": ExperimentSpec(
        runner=_run_convergence_orders,
        methods=(),
        defaults={"method": None, "h": 1.0, "t_end": 1.0, "record_every": 1},
        params={"kepler_h0": 0.01, "lowrank_h0": 0.2, "levels": 4, "substeps": 10},
        description="observed orders for every integrator by step halving",
    ),
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute a validated configuration and time it."""
    spec = EXPERIMENTS[config.experiment]
    start = time.perf_counter()
    result = spec.runner(config)
    result.summary["wall_seconds"] = time.perf_counter() - start
    return result
