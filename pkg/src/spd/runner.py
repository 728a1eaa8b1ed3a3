"""Execute validated run configurations and write their artifacts.

Artifacts in ``output_dir``:

``config.json``
    The fully resolved configuration.
``series.csv``
    One row per recorded step.  Columns ``step,time,n_terms,n_ztype,mem_bytes``
    followed by ``msd`` and ``norm`` (1D models), ``magnetization`` (TFIM) and
    ``F_1..F_m,F_rest`` (weight spectrum, rescaled by the initial total).
``profile.csv``
    ``step,time,site,C,raw``: one row per recorded step per site.
``summary.json``
    Run metadata, peak term count, wall-clock, fit results and the
    ``truncated`` marker of a resource-limit abort.
``checkpoint.bin``
    Latest operator snapshot, when ``resources.checkpoint_every > 0``.

Numbers are written with 17 significant digits so that files are
byte-identical across thread counts.
"""

from __future__ import annotations

import csv
import dataclasses
import itertools
import json
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import io, kernels
from .config import ConfigError, RunConfig, validate
from .evolution import EvolutionConfig, Trajectory, evolve
from .models import (
    LatticeSpec,
    build_tfim,
    build_tilted_ising,
    build_xx_ladder,
    central_site,
    ladder_density,
    local_energy,
    tfim_symmetrized_sequence,
)
from .observables import (
    InsufficientDataError,
    correlation_profile,
    diffusion_constant,
    extrapolate_zero_threshold,
    msd,
)
from .pauli_algebra import PauliTerm
from .pauli_sum import DEFAULT_MAX_TERMS, PauliSum, n_words_for

SERIES_SCHEMA = "spd-series/1"
PROFILE_SCHEMA = "spd-profile/1"
SUMMARY_SCHEMA = "spd-summary/1"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_INVARIANT = 4


# Peak bytes held during one rotation, in units of one stored term: the input,
# the anticommuting candidates, their merge scratch and the merged output.
ROTATION_OVERHEAD = 6


def physical_memory() -> int:
    """Physical memory in bytes, capped by a cgroup v2 limit when one is set."""
    total = os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    try:
        with open("/sys/fs/cgroup/memory.max") as fh:
            text = fh.read().strip()
        if text.isdigit():
            total = min(total, int(text))
    except OSError:
        pass
    return total


def auto_term_limit(n: int, complex_coeffs: bool = False, memory: int | None = None) -> int:
    """Largest term count whose rotation still fits in ``memory`` (default: 80% of RAM)."""
    memory = int(0.8 * physical_memory()) if memory is None else memory
    per_term = 16 * n_words_for(n) + (16 if complex_coeffs else 8)
    return max(1, min(DEFAULT_MAX_TERMS, memory // (per_term * ROTATION_OVERHEAD)))


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


@dataclass
class Problem:
    """Everything needed to evolve one configuration."""

    n: int
    step: object
    initial: PauliSum
    densities: list[PauliSum] | None


def build_problem(cfg: RunConfig) -> Problem:
    m = cfg.model
    if m.name == "tilted_ising":
        L = m.L
        dens = [local_energy(j, L) for j in range(1, L + 1)]
        return Problem(L, build_tilted_ising(L), dens[(L + 1) // 2 - 1], dens)
    if m.name == "xx_ladder":
        L = m.L
        dens = [ladder_density(j, L) for j in range(1, L + 1)]
        H = build_xx_ladder(L)
        return Problem(H.n, H, dens[(L + 1) // 2 - 1], dens)
    lat = LatticeSpec(tuple(m.extents))
    step = build_tfim(lat, m.h) if m.trotter == "first" else tfim_symmetrized_sequence(lat, m.h)
    z = PauliSum.from_terms(lat.n, [PauliTerm.from_sites(lat.n, {central_site(lat): "Z"})])
    return Problem(lat.n, step, z, None)


def series_columns(cfg: RunConfig) -> list[str]:
    cols = ["step", "time", "n_terms", "n_ztype", "mem_bytes"]
    if cfg.observables.msd:
        cols += ["msd", "norm"]
    if cfg.observables.magnetization:
        cols.append("magnetization")
    m = cfg.observables.spectrum_max_m
    if m:
        cols += [f"F_{k}" for k in range(1, m + 1)] + ["F_rest"]
    return cols


class _Writers:
    """Streams series/profile rows; files are flushed after every record."""

    def __init__(self, out: Path, cfg: RunConfig, problem: Problem, append: bool, f0: float):
        self.cfg = cfg
        self.problem = problem
        self.f0 = f0
        mode = "a" if append else "w"
        self.series_fh = open(out / "series.csv", mode, newline="")
        self.series = csv.writer(self.series_fh, lineterminator="\n")
        self.cols = series_columns(cfg)
        if not append:
            self.series.writerow(self.cols)
        self.profile_fh = None
        if cfg.observables.profile:
            self.profile_fh = open(out / "profile.csv", mode, newline="")
            self.profile = csv.writer(self.profile_fh, lineterminator="\n")
            if not append:
                self.profile.writerow(["step", "time", "site", "C", "raw"])

    def __call__(self, traj: Trajectory, s: PauliSum) -> None:
        k, t = traj.steps[-1], traj.times[-1]
        row = [k, t, traj.n_terms[-1], traj.n_ztype[-1], s.nbytes()]
        obs = self.cfg.observables
        if obs.profile:
            prof = correlation_profile(s, self.problem.densities, t)
            for j, (c, r) in enumerate(zip(prof.values, prof.raw), start=1):
                self.profile.writerow([_fmt(k), _fmt(t), j, _fmt(c), _fmt(r)])
            self.profile_fh.flush()
            if obs.msd:
                row += [msd(prof), prof.total]
        if obs.magnetization:
            row.append(s.expectation_zero())
        if obs.spectrum_max_m:
            spec = s.weight_spectrum()
            m = obs.spectrum_max_m
            head = [spec.get(w, 0.0) / self.f0 for w in range(1, m + 1)]
            rest = sum(v for w, v in spec.items() if w > m) / self.f0
            row += head + [rest]
        self.series.writerow([_fmt(v) for v in row])
        self.series_fh.flush()

    def close(self) -> None:
        self.series_fh.close()
        if self.profile_fh is not None:
            self.profile_fh.close()


def resolved_term_limit(cfg: RunConfig, n: int) -> int:
    mt = cfg.resources.max_terms
    return auto_term_limit(n) if mt == "auto" else int(mt)


def _evolution_config(cfg: RunConfig, n: int) -> EvolutionConfig:
    e = cfg.evolution
    return EvolutionConfig(
        delta=e.delta,
        dt=e.dt,
        t_max=e.t_max,
        x_cutoff=e.x_cutoff,
        x_period=e.x_period,
        max_terms=resolved_term_limit(cfg, n),
        record_every=e.record_every,
        threads=cfg.threads,
    )


def read_series(path: str | os.PathLike) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return {}
    header, body = rows[0], rows[1:]
    data = np.array(body, dtype=float).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _fit_summary(cfg: RunConfig, series: dict[str, np.ndarray]) -> dict | None:
    if "msd" not in series:
        return None
    try:
        fit = diffusion_constant(series["time"], series["msd"], tuple(cfg.observables.fit_window))
    except InsufficientDataError as exc:
        return {"window": cfg.observables.fit_window, "error": str(exc)}
    return {
        "window": list(fit.window),
        "D": fit.D,
        "slope": fit.slope,
        "intercept": fit.intercept,
        "rms_residual": fit.residual,
        "n_samples": fit.n_samples,
    }


def _trim_csv(path: Path, last_step: int, stride: int) -> None:
    """Keep the rows an uninterrupted run would have written up to ``last_step``.

    Rows past the checkpoint go, and so does an end-of-run row written off the
    recording stride.
    """
    if not path.exists():
        return
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = rows[:1] + [
        r for r in rows[1:] if int(r[0]) < last_step or (int(r[0]) == last_step and last_step % stride == 0)
    ]
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(keep)


def _execute(
    cfg: RunConfig,
    out: Path,
    s0: PauliSum,
    start_step: int,
    resumed: bool,
    progress: Callable[[str], None] | None,
) -> int:
    problem = build_problem(cfg)
    ecfg = _evolution_config(cfg, problem.n)
    f0 = float(problem.initial.norm2())
    writers = _Writers(out, cfg, problem, append=resumed, f0=f0)
    ckpt = out / "checkpoint.bin"
    every = cfg.resources.checkpoint_every

    def on_step(k, t, s):
        if every and k % every == 0:
            io.save_checkpoint(ckpt, s, k, t)
        if progress is not None:
            progress(f"step {k} t={t:.4f} N={len(s)}")

    wall0 = time.perf_counter()
    try:
        traj = evolve(
            s0,
            problem.step,
            ecfg,
            start_step=start_step,
            on_step=on_step,
            on_record=writers,
            record_initial=not resumed,
        )
    finally:
        writers.close()
    wall = time.perf_counter() - wall0

    final = traj.final
    status = "resource-limit" if traj.truncated else "ok"
    invariant_error = None
    try:
        final.check_invariants()
        if problem.densities is None:
            # Z_c and H commute with the parity prod_j Z_j, so every surviving string has even X-weight.
            if np.any(final.x_weights() % 2):
                raise AssertionError("odd X-weight term in TFIM evolution")
    except AssertionError as exc:
        invariant_error = str(exc)
        status = "invariant-failure"
    if every and final is not None and invariant_error is None:
        io.save_checkpoint(ckpt, final, traj.final_step, traj.final_step * cfg.evolution.dt)

    series = read_series(out / "series.csv")
    summary = {
        "schema": SUMMARY_SCHEMA,
        "series_schema": SERIES_SCHEMA,
        "profile_schema": PROFILE_SCHEMA if cfg.observables.profile else None,
        "status": status,
        "truncated": traj.truncated,
        "error": traj.error or invariant_error,
        "backend": kernels.backend_name(),
        "n_sites": problem.n,
        "steps_completed": traj.final_step,
        "steps_requested": ecfg.n_steps,
        "t_reached": traj.final_step * cfg.evolution.dt,
        "max_terms": ecfg.max_terms,
        "peak_terms": traj.peak_terms,
        "final_terms": len(final),
        "final_ztype": final.count_ztype(),
        "final_mem_bytes": final.nbytes(),
        "wall_clock_s": wall,
        "resumed_from_step": start_step if resumed else None,
        "fit": _fit_summary(cfg, series),
        "endpoint": _endpoint(series),
        "config": cfg.to_dict(),
    }
    with open(out / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    if invariant_error:
        return EXIT_INVARIANT
    return EXIT_RESOURCE if traj.truncated else EXIT_OK


def _endpoint(series: dict[str, np.ndarray]) -> dict | None:
    if not series or len(series["step"]) == 0:
        return None
    out = {"time": float(series["time"][-1])}
    for name in ("msd", "magnetization"):
        if name in series:
            out[name] = float(series[name][-1])
    return out


def run(cfg: RunConfig, progress: Callable[[str], None] | None = None) -> int:
    """Execute one configuration; returns the process exit status."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "config.json", "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")
    problem = build_problem(cfg)
    return _execute(cfg, out, problem.initial, 0, False, progress)


def resume(output_dir: str, overrides: dict | None = None, progress=None) -> int:
    """Continue the run stored in ``output_dir`` from its ``checkpoint.bin``.

    ``overrides`` may extend ``t_max`` or change resource limits and threads.
    """
    out = Path(output_dir)
    cfg_path = out / "config.json"
    if not cfg_path.exists():
        raise ConfigError(f"output_dir: no config.json in {out}")
    with open(cfg_path) as fh:
        raw = json.load(fh)
    if overrides:
        raw = _merge(raw, overrides)
    raw["output_dir"] = str(out)
    cfg = validate(raw)
    ckpt = out / "checkpoint.bin"
    if not ckpt.exists():
        raise ConfigError(f"output_dir: no checkpoint.bin in {out}")
    s, meta = io.load_checkpoint(ckpt)
    problem = build_problem(cfg)
    if s.n != problem.n:
        raise ConfigError(f"checkpoint has {s.n} sites, config needs {problem.n}")
    with open(cfg_path, "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2)
        fh.write("\n")
    # A finished run keeps its end row, since no further step will re-record it.
    stride = 1 if meta.step >= _evolution_config(cfg, s.n).n_steps else cfg.evolution.record_every
    _trim_csv(out / "series.csv", meta.step, stride)
    _trim_csv(out / "profile.csv", meta.step, stride)
    return _execute(cfg, out, s, meta.step, True, progress)


def _merge(base: dict, over: dict) -> dict:
    out = dict(base)
    for k, v in over.items():
        out[k] = _merge(out[k], v) if isinstance(v, dict) and isinstance(out.get(k), dict) else v
    return out


# ---------------------------------------------------------------- sweeps


def sweep_configs(base: dict, deltas: list, dts: list[float] | None) -> list[dict]:
    """Cartesian product of threshold and time-step values over ``base``."""
    evo = base.get("evolution", {})
    dts = dts or [evo.get("dt")]
    out_root = base.get("output_dir", "spd-sweep")
    raws = []
    for dt, delta in itertools.product(dts, deltas):
        raw = json.loads(json.dumps(base))
        raw.setdefault("evolution", {})
        raw["evolution"]["delta"] = delta
        raw["evolution"]["dt"] = dt
        tag = str(delta).replace("^", "").replace("*", "").replace("/", "_")
        raw["output_dir"] = os.path.join(out_root, f"dt{dt}_delta{tag}")
        raws.append(raw)
    return raws


def _model_key(cfg: RunConfig) -> dict:
    d = dataclasses.asdict(cfg)
    for k in ("delta", "dt"):
        d["evolution"].pop(k)
    d.pop("output_dir")
    d.pop("threads")
    d["resources"] = None
    return d


def check_sweep(cfgs: list[RunConfig]) -> None:
    if len(cfgs) < 2:
        raise ConfigError("sweep: need at least two runs")
    ref = _model_key(cfgs[0])
    for i, c in enumerate(cfgs[1:], start=1):
        if _model_key(c) != ref:
            raise ConfigError(f"sweep[{i}]: settings other than delta/dt differ from sweep[0]")
    seen = set()
    for i, c in enumerate(cfgs):
        key = (c.evolution.delta, c.evolution.dt)
        if key in seen:
            raise ConfigError(f"sweep[{i}]: duplicate (delta, dt) = {key}")
        seen.add(key)


def _primary(series: dict[str, np.ndarray]) -> str:
    return "msd" if "msd" in series else "magnetization"


def sweep(cfgs: list[RunConfig], summary_path: str | os.PathLike, progress=None) -> int:
    """Run every configuration, then extrapolate ``delta/dt -> 0``.

    The combined summary lists each run's endpoint (``D`` when a fit is
    available, else the final magnetization), zero-threshold extrapolations
    over all runs and per time step, and a table of pairwise maximum absolute
    differences of the primary series at common recorded times.
    """
    check_sweep(cfgs)
    runs = []
    worst = EXIT_OK
    for cfg in cfgs:
        code = run(cfg, progress)
        worst = max(worst, code)
        with open(Path(cfg.output_dir) / "summary.json") as fh:
            summ = json.load(fh)
        series = read_series(Path(cfg.output_dir) / "series.csv")
        fit = summ.get("fit") or {}
        metric = fit.get("D")
        name = "D"
        if metric is None:
            name = _primary(series)
            metric = float(series[name][-1]) if name in series and len(series[name]) else None
        runs.append(
            {
                "output_dir": cfg.output_dir,
                "delta": cfg.evolution.delta,
                "dt": cfg.evolution.dt,
                "ratio": cfg.evolution.delta / cfg.evolution.dt,
                "status": summ["status"],
                "metric": name,
                "value": metric,
                "_series": series,
            }
        )

    def extrap(group):
        pts = [(r["ratio"], r["value"]) for r in group if r["value"] is not None and r["status"] == "ok"]
        try:
            return extrapolate_zero_threshold(pts)
        except InsufficientDataError as exc:
            return str(exc)

    by_dt: dict[float, list] = {}
    for r in runs:
        by_dt.setdefault(r["dt"], []).append(r)

    table = []
    for a, b in itertools.combinations(range(len(runs)), 2):
        sa, sb = runs[a]["_series"], runs[b]["_series"]
        col = _primary(sa)
        if col not in sa or col not in sb:
            continue
        common, ia, ib = np.intersect1d(np.round(sa["time"], 9), np.round(sb["time"], 9), return_indices=True)
        diff = float(np.max(np.abs(sa[col][ia] - sb[col][ib]))) if len(common) else None
        table.append({"a": a, "b": b, "column": col, "max_abs_diff": diff, "n_common": int(len(common))})

    combined = {
        "schema": "spd-sweep/1",
        "runs": [{k: v for k, v in r.items() if k != "_series"} for r in runs],
        "extrapolation_all": extrap(runs),
        "extrapolation_by_dt": {str(dt): extrap(g) for dt, g in by_dt.items()},
        "pairwise": table,
    }
    Path(summary_path).parent.mkdir(parents=True, exist_ok=True)
    with open(summary_path, "w") as fh:
        json.dump(combined, fh, indent=2)
        fh.write("\n")
    return worst
