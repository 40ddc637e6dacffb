"""Scenario runs, parameter sweeps, and the velocity-error study.

Every entry point produces a flat list of :class:`RunRecord` rows that
serialise to a fixed, versioned CSV schema.  Runs are deterministic for
a given (config, seed): RNG streams are derived from a seed sequence
keyed by sweep point and trial index, the fading trace (when enabled) is
shared by all schemes at a point, and aggregate rows recompute the
efficiency ratios from mean energy and mean data so that EE = D/E holds
on every emitted row.  Wall time is measured but kept out of the CSV.

The velocity-error study corrupts only the planner: the schedule and the
optimised allocation are computed under the estimated speed v + |e|,
e ~ N(0, sigma_v^2), while all reported metrics use the true kinematics.
The data floor is frozen from the true-speed scenario so that trials at
different estimates chase the same service target.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import allocators, metrics, optimizer
from .configio import SCHEMES, HarnessOptions, load_config, scenario_hash
from .scenario import KMH_TO_MPS, ScenarioConfig, dbm_to_watts, segment_boundaries

CSV_VERSION = "railpower csv v1"
CSV_COLUMNS = (
    "kind", "param", "value", "trial", "scheme", "scenario",
    "m", "n", "d_l", "v_mps", "pt_w", "d_min_bits",
    "energy_j", "data_bits", "ee_bits_per_j", "se_bits_per_s_per_hz",
    "meets_floor", "converged", "cycles", "h_inf", "error",
)

SWEEP_PARAMS = ("M", "d_l", "v", "P_T", "sigma_v")


@dataclass(frozen=True)
class RunRecord:
    """One scheme's outcome on one scenario point."""

    kind: str               # "run" | "trial" | "mean"
    param: str
    value: float
    trial: int              # -1 on "run"/"mean" rows
    scheme: str
    scenario: str
    m: int
    n: int
    d_l: float
    v_mps: float
    pt_w: float
    d_min_bits: float
    energy_j: float
    data_bits: float
    ee_bits_per_j: float
    se_bits_per_s_per_hz: float
    meets_floor: bool
    converged: bool
    cycles: int | None      # solver rows only
    h_inf: float | None     # solver rows only
    error: str = ""
    wall_time_s: float = 0.0   # measured, intentionally not serialised


@dataclass(frozen=True)
class SweepSpec:
    """A one-parameter sweep over explicit values."""

    param: str
    values: tuple[float, ...]
    schemes: tuple[str, ...] = SCHEMES
    trials: int = 1
    seed: int | None = None    # defaults to the scenario seed

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {self.param!r}; "
                             f"pick from {', '.join(SWEEP_PARAMS)}")
        if not self.values:
            raise ValueError("sweep needs a nonempty value list")
        if not self.schemes:
            raise ValueError("sweep needs at least one scheme")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def apply_sweep_value(cfg: ScenarioConfig, param: str, value: float) -> ScenarioConfig:
    """Return cfg with the swept parameter replaced (user-facing units)."""
    if param == "M":
        return cfg.with_(num_relays=int(value))
    if param == "d_l":
        return cfg.with_(d_l=float(value))
    if param == "v":
        return cfg.with_(v=float(value) * KMH_TO_MPS)   # km/h
    if param == "P_T":
        return cfg.with_(p_t=dbm_to_watts(float(value)))  # dBm
    if param == "sigma_v":
        return cfg   # handled by the velocity-error pathway
    raise ValueError(f"unknown sweep parameter {param!r}")


def _solver_state(cfg: ScenarioConfig, options: HarnessOptions) -> optimizer.MultiplierState:
    return optimizer.MultiplierState.initial(
        cfg, sigma=options.solver_sigma0, gamma_growth=options.solver_growth,
        eps=options.solver_eps, alpha_step=options.solver_alpha,
        n_max=options.solver_n_max, inner_cap=options.solver_inner_cap,
    )


def run_point(plan_cfg: ScenarioConfig, options: HarnessOptions,
              seed_seq: np.random.SeedSequence,
              eval_cfg: ScenarioConfig | None = None,
              d_min_bits: float | None = None,
              kind: str = "run", param: str = "", value: float = float("nan"),
              trial: int = -1) -> list[RunRecord]:
    """Run the requested schemes once; plan and evaluation may differ in speed."""
    eval_cfg = plan_cfg if eval_cfg is None else eval_cfg
    plan_sched = segment_boundaries(plan_cfg)
    eval_sched = segment_boundaries(eval_cfg)

    rng_fading, rng_random, rng_csi = [np.random.default_rng(s)
                                       for s in seed_seq.spawn(3)]
    fading_trace = None
    if eval_cfg.fading:
        fading_trace = metrics.sample_fading_trace(eval_cfg, eval_sched, rng_fading)
    eval_table = metrics.build_gain_table(eval_cfg, eval_sched, fading_db=fading_trace)
    # planning always sees the deterministic channel
    plan_table = (eval_table if eval_cfg is plan_cfg and fading_trace is None
                  else metrics.build_gain_table(plan_cfg, plan_sched))

    if d_min_bits is None:
        d_min_bits = optimizer.data_floor(plan_cfg, plan_sched, plan_table)
    tag = scenario_hash(eval_cfg)

    records = []
    for scheme in options.schemes:
        start = time.perf_counter()
        cycles, h_inf, converged, error = None, None, True, ""
        alloc = None
        try:
            if scheme == "constant":
                alloc = allocators.constant_alloc(plan_cfg, plan_sched)
            elif scheme == "average":
                alloc = allocators.average_alloc(plan_cfg, plan_sched)
            elif scheme == "random":
                alloc = allocators.random_alloc(plan_cfg, plan_sched, rng_random)
            elif scheme == "csi":
                snap = allocators.ChannelSnapshot.from_scenario(
                    plan_cfg, plan_sched, rng_csi if plan_cfg.fading else None)
                alloc = allocators.csi_alloc(plan_cfg, plan_sched, snap)
            elif scheme == "optimized":
                alloc, diag = optimizer.solve(
                    plan_cfg, plan_sched, d_min=d_min_bits,
                    state=_solver_state(plan_cfg, options), table=plan_table)
                cycles, h_inf, converged = diag.cycles, diag.h_inf, diag.converged
            else:
                raise ValueError(f"unknown scheme {scheme!r}")
        except (optimizer.InfeasibleDataFloor, ValueError) as exc:
            error, converged = str(exc), False

        if alloc is None:
            rec = RunRecord(
                kind=kind, param=param, value=value, trial=trial, scheme=scheme,
                scenario=tag, m=eval_cfg.num_relays, n=eval_cfg.num_bins,
                d_l=eval_cfg.d_l, v_mps=eval_cfg.v, pt_w=eval_cfg.p_t,
                d_min_bits=d_min_bits, energy_j=float("nan"), data_bits=float("nan"),
                ee_bits_per_j=float("nan"), se_bits_per_s_per_hz=float("nan"),
                meets_floor=False, converged=False, cycles=cycles, h_inf=h_inf,
                error=error, wall_time_s=time.perf_counter() - start,
            )
        else:
            rec_metrics = metrics.compute_metrics(alloc, eval_cfg, eval_sched, eval_table)
            rec = RunRecord(
                kind=kind, param=param, value=value, trial=trial, scheme=scheme,
                scenario=tag, m=eval_cfg.num_relays, n=eval_cfg.num_bins,
                d_l=eval_cfg.d_l, v_mps=eval_cfg.v, pt_w=eval_cfg.p_t,
                d_min_bits=d_min_bits,
                energy_j=rec_metrics.energy_j, data_bits=rec_metrics.data_bits,
                ee_bits_per_j=rec_metrics.ee_bits_per_j,
                se_bits_per_s_per_hz=rec_metrics.se_bits_per_s_per_hz,
                meets_floor=bool(rec_metrics.data_bits >= d_min_bits * (1.0 - 1e-3)),
                converged=converged, cycles=cycles, h_inf=h_inf, error=error,
                wall_time_s=time.perf_counter() - start,
            )
        records.append(rec)
    return records


def run_scenario(config_path) -> list[RunRecord]:
    """Run every configured scheme once on the scenario in a config file."""
    cfg, options = load_config(config_path)
    seed_seq = np.random.SeedSequence((cfg.seed, 0, 0))
    return run_point(cfg, options, seed_seq)


def _mean_records(rows: list[RunRecord]) -> list[RunRecord]:
    """Aggregate trial rows per (param, value, scheme); ratios from means."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in rows:
        groups.setdefault((r.param, r.value, r.scheme), []).append(r)
    out = []
    for (param, value, scheme), rs in groups.items():
        ok = [r for r in rs if not r.error and np.isfinite(r.energy_j)]
        if not ok:
            proto = rs[0]
            out.append(RunRecord(**{**vars(proto), "kind": "mean", "trial": -1}))
            continue
        e = float(np.mean([r.energy_j for r in ok]))
        d = float(np.mean([r.data_bits for r in ok]))
        proto = ok[0]
        # bandwidth * traversal time, recovered from any finite trial row
        bt = (proto.data_bits / proto.se_bits_per_s_per_hz
              if proto.se_bits_per_s_per_hz > 0 else float("nan"))
        out.append(RunRecord(
            kind="mean", param=param, value=value, trial=-1, scheme=scheme,
            scenario=proto.scenario, m=proto.m, n=proto.n, d_l=proto.d_l,
            v_mps=proto.v_mps, pt_w=proto.pt_w, d_min_bits=proto.d_min_bits,
            energy_j=e, data_bits=d, ee_bits_per_j=d / e,
            se_bits_per_s_per_hz=d / bt,
            meets_floor=all(r.meets_floor for r in ok),
            converged=all(r.converged for r in ok),
            cycles=None, h_inf=None,
            error="" if len(ok) == len(rs) else f"{len(rs) - len(ok)} failed trials",
        ))
    return out


def _sweep_point(args):
    cfg, options, spec, idx, value, trial = args
    seed = cfg.seed if spec.seed is None else spec.seed
    seed_seq = np.random.SeedSequence((seed, idx, trial))
    point_options = HarnessOptions(**{**vars(options), "schemes": spec.schemes})
    if spec.param == "sigma_v":
        return _velocity_error_point(cfg, point_options, float(value), trial, seed_seq)
    try:
        point_cfg = apply_sweep_value(cfg, spec.param, value)
        return run_point(point_cfg, point_options, seed_seq, kind="trial",
                         param=spec.param, value=float(value), trial=trial)
    except ValueError as exc:
        return [RunRecord(
            kind="trial", param=spec.param, value=float(value), trial=trial,
            scheme=s, scenario="", m=cfg.num_relays, n=cfg.num_bins, d_l=cfg.d_l,
            v_mps=cfg.v, pt_w=cfg.p_t, d_min_bits=float("nan"),
            energy_j=float("nan"), data_bits=float("nan"),
            ee_bits_per_j=float("nan"), se_bits_per_s_per_hz=float("nan"),
            meets_floor=False, converged=False, cycles=None, h_inf=None,
            error=str(exc)) for s in spec.schemes]


def sweep(cfg: ScenarioConfig, options: HarnessOptions, spec: SweepSpec,
          workers: int = 1) -> list[RunRecord]:
    """One-parameter sweep; failing points become error rows, not crashes.

    Points are independent (own RNG streams), so they may run in a
    process pool; rows come back in deterministic order either way.
    """
    tasks = [(cfg, options, spec, idx, value, trial)
             for idx, value in enumerate(spec.values)
             for trial in range(spec.trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_point = list(pool.map(_sweep_point, tasks))
    else:
        per_point = [_sweep_point(t) for t in tasks]
    rows = [r for point_rows in per_point for r in point_rows]
    return rows + _mean_records(rows)


def draw_speed_error(rng: np.random.Generator, sigma_v: float) -> float:
    """One nonnegative speed estimation error: |N(0, sigma_v^2)| [m/s]."""
    return abs(rng.normal(0.0, sigma_v)) if sigma_v > 0 else 0.0


def _velocity_error_point(cfg: ScenarioConfig, options: HarnessOptions,
                          sigma_v: float, trial: int,
                          seed_seq: np.random.SeedSequence) -> list[RunRecord]:
    if sigma_v > 0:
        # no draw at sigma 0 keeps the stream identical to a plain run
        rng_v = np.random.default_rng(seed_seq.spawn(1)[0])
        v_err = draw_speed_error(rng_v, sigma_v)
    else:
        v_err = 0.0
    sched = segment_boundaries(cfg)
    d_min = optimizer.data_floor(cfg, sched)   # frozen at the true speed
    plan_cfg = cfg.with_(v=cfg.v + v_err)
    return run_point(plan_cfg, options, seed_seq, eval_cfg=cfg, d_min_bits=d_min,
                     kind="trial", param="sigma_v", value=sigma_v, trial=trial)


def monte_carlo_velocity_error(cfg: ScenarioConfig, options: HarnessOptions,
                               sigmas, trials: int, workers: int = 1) -> list[RunRecord]:
    """Velocity-error study: plan under v + |N(0, sigma^2)|, evaluate under v."""
    spec = SweepSpec(param="sigma_v", values=tuple(float(s) for s in sigmas),
                     schemes=options.schemes, trials=trials)
    return sweep(cfg, options, spec, workers=workers)


def _format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def records_to_csv(records: list[RunRecord]) -> str:
    buf = io.StringIO()
    buf.write(f"# {CSV_VERSION}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow([_format_value(getattr(r, col)) for col in CSV_COLUMNS])
    return buf.getvalue()


def write_csv(records: list[RunRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


def read_csv_rows(path) -> list[dict]:
    with open(path) as fh:
        first = fh.readline().strip()
        if first != f"# {CSV_VERSION}":
            raise ValueError(f"unrecognised CSV version line {first!r}")
        return list(csv.DictReader(fh))


FIGURES = {
    "E-vs-M": ("M", "energy_j", "relay count", "energy [J]"),
    "EE-vs-M": ("M", "ee_bits_per_j", "relay count", "energy efficiency [bits/J]"),
    "E-vs-dl": ("d_l", "energy_j", "cell width [m]", "energy [J]"),
    "EE-vs-dl": ("d_l", "ee_bits_per_j", "cell width [m]", "energy efficiency [bits/J]"),
    "SE-vs-dl": ("d_l", "se_bits_per_s_per_hz", "cell width [m]",
                 "spectral efficiency [bits/s/Hz]"),
    "E-vs-v": ("v", "energy_j", "train speed [km/h]", "energy [J]"),
    "EE-vs-v": ("v", "ee_bits_per_j", "train speed [km/h]", "energy efficiency [bits/J]"),
    "SE-vs-v": ("v", "se_bits_per_s_per_hz", "train speed [km/h]",
                "spectral efficiency [bits/s/Hz]"),
    "E-vs-sigmav": ("sigma_v", "energy_j", "speed error std [m/s]", "energy [J]"),
    "EE-vs-sigmav": ("sigma_v", "ee_bits_per_j", "speed error std [m/s]",
                     "energy efficiency [bits/J]"),
}


def emit_plot_data(csv_path, figure_id: str, out_dir) -> list[str]:
    """Reshape sweep CSV rows into per-figure series files plus a manifest.

    The .dat file holds the x grid in the first column and one column per
    scheme; any plotting tool can consume it.
    """
    import os

    if figure_id not in FIGURES:
        raise ValueError(f"unknown figure id {figure_id!r}; "
                         f"known: {', '.join(sorted(FIGURES))}")
    param, metric, x_label, y_label = FIGURES[figure_id]
    rows = read_csv_rows(csv_path)
    use = [r for r in rows if r["param"] == param and r["kind"] == "mean"]
    if not use:
        use = [r for r in rows if r["param"] == param and r["kind"] == "trial"]
    if not use:
        raise ValueError(f"no rows for parameter {param!r} in {csv_path}")

    schemes = [s for s in SCHEMES if any(r["scheme"] == s for r in use)]
    xs = sorted({float(r["value"]) for r in use})
    series = {s: dict() for s in schemes}
    for r in use:
        if r["scheme"] in series and r[metric]:
            series[r["scheme"]][float(r["value"])] = float(r[metric])

    os.makedirs(out_dir, exist_ok=True)
    dat_path = os.path.join(out_dir, f"{figure_id}.dat")
    man_path = os.path.join(out_dir, f"{figure_id}.manifest")
    with open(dat_path, "w") as fh:
        fh.write("# " + " ".join(["x"] + schemes) + "\n")
        for x in xs:
            cells = [format(x, ".12g")]
            cells += [format(series[s].get(x, float("nan")), ".12g") for s in schemes]
            fh.write(" ".join(cells) + "\n")
    with open(man_path, "w") as fh:
        fh.write(f"figure: {figure_id}\n")
        fh.write(f"x: {x_label}\n")
        fh.write(f"y: {y_label}\n")
        fh.write(f"columns: x {' '.join(schemes)}\n")
        fh.write("units: energy J, data bits, ee bits/J, se bits/s/Hz\n")
    return [dat_path, man_path]
