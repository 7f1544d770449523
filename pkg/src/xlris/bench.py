"""Seeded Monte-Carlo experiments behind the NMSE, angle, gain and complexity figures.

Every experiment sweeps one ``SystemConfig`` field (or a list of points) and
aggregates per-method medians and means over ``cfg.trials`` channel draws.
Trial ``t`` derives its channel and noise seeds from ``(cfg.seed, t)`` only, so
draws are shared across swept values and across methods, and serial and
parallel runs agree. The training schedule and the BS-RIS link are fixed for a
given swept configuration.
"""
from __future__ import annotations

import csv
import io
import json
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .channel import build_realization, default_bs_ris_link, sample_paths
from .config import SystemConfig
from .estimators import (DictionaryPair, ls_operators, MatchingContext, RefineConfig, estimate_2dls, estimate_2dols,
                         estimate_komp, lower_bound, mmpsr, nmse_per_k, svd_subspace)
from .estimators.mmpsr import distinct_argmax
from .geometry import SphericalPoint, exact_path_difference, fresnel_path_difference, response_from_path
from .measurement import make_schedule, simulate_training
from .squint import trajectory

METHODS = ("2D-OLS", "CC-MMPSR", "IN-MMPSR", "K-OMP", "2D-LS", "LB")

# experiment id -> (swept parameter, default values, default methods)
EXPERIMENTS = {
    "nmse_vs_Q": ("Q", [24, 48, 72, 96], ["2D-OLS", "CC-MMPSR", "IN-MMPSR", "2D-LS"]),
    "nmse_vs_K": ("K", [1, 32, 128], ["CC-MMPSR", "IN-MMPSR"]),
    "nmse_vs_power": ("sigma_p2_dbm", [0.0, 10.0, 20.0, 30.0], ["2D-OLS", "CC-MMPSR", "IN-MMPSR"]),
    "angle_mse": ("K", [1, 32], ["CC-MMPSR", "IN-MMPSR"]),
    "trajectory_map": ("desired", [[45.0, 45.0, 20.0]], []),
    "gain_vs_distance": ("ris_ny", [128, 256, 512], []),
    "lb_vs_ols": ("sigma_p2_dbm", [15.0, 30.0], ["2D-OLS", "LB"]),
    "complexity_scan": ("g_r_z", [16, 32, 64], ["CC-MMPSR"]),
}

ANGLE_KEYS = ("theta_t", "phi_t", "u_theta_t", "u_phi_t")


@dataclass
class ExperimentSpec:
    experiment: str
    param: str | None = None
    values: list | None = None
    methods: list | None = None
    # distances for gain_vs_distance, in metres
    distances: list = field(default_factory=lambda: [float(d) for d in range(5, 101, 5)])

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {sorted(EXPERIMENTS)}")
        param, values, methods = EXPERIMENTS[self.experiment]
        self.param = self.param or param
        self.values = list(values if self.values is None else self.values)
        self.methods = list(methods if self.methods is None else self.methods)
        if not self.values:
            raise ValueError("swept value list is empty")
        for v in self.values:
            if not np.all(np.isfinite(np.asarray(v, dtype=float))):
                raise ValueError(f"non-finite swept value {v!r}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")

    def to_dict(self) -> dict:
        return {"experiment": self.experiment, "param": self.param, "values": self.values,
                "methods": self.methods, "distances": self.distances}


@dataclass(frozen=True)
class GainCurvePoint:
    distance: float
    ris_ny: int
    ris_nz: int
    gain: float


def trial_seeds(master: int, t: int) -> tuple[int, int]:
    """Channel and noise seeds of trial ``t``; a pure function of ``(master, t)``."""
    a, b = np.random.SeedSequence([master, t]).generate_state(2)
    return int(a), int(b)


def schedule_seed(master: int) -> int:
    return int(np.random.SeedSequence([master, 2 ** 31]).generate_state(1)[0])


def angle_errors(true_paths, support) -> dict:
    """Squared virtual-angle errors averaged over paths after Hungarian matching."""
    est = support.refined
    if len(est) != len(true_paths):
        raise ValueError(f"{len(est)} estimated paths vs {len(true_paths)} true paths")
    truth = np.array([[p.ris_point.theta_t, p.ris_point.phi_t, p.user_theta_t, p.user_phi_t]
                      for p in true_paths])
    guess = np.array([[e.theta_t, e.phi_t, e.u_theta_t, e.u_phi_t] for e in est])
    cost = np.linalg.norm(truth[:, None, :] - guess[None, :, :], axis=2)
    rows, cols = linear_sum_assignment(cost)
    sq = (truth[rows] - guess[cols]) ** 2
    return {k: float(v) for k, v in zip(ANGLE_KEYS, sq.mean(axis=0))}


def angle_mse(true_paths, support) -> dict:
    """Per-parameter angle MSE; accepts one trial or lists of trials."""
    if isinstance(support, (list, tuple)):
        errs = [angle_errors(t, s) for t, s in zip(true_paths, support)]
        return {k: float(np.mean([e[k] for e in errs])) for k in ANGLE_KEYS}
    return angle_errors(true_paths, support)


class TrialRunner:
    """Runs the requested methods on shared channel draws for one configuration."""

    def __init__(self, cfg: SystemConfig, dicts: DictionaryPair | None = None, need_dicts: bool = True):
        self.cfg = cfg
        self.link = default_bs_ris_link(cfg)
        self.sched = make_schedule(cfg, self.link, schedule_seed(cfg.seed))
        self.full_sched = None
        self.dicts = dicts if dicts is not None or not need_dicts else DictionaryPair.from_config(cfg)
        self.ctx = None
        self.Vtilde = None
        self.full_Vtilde = None
        self.full_ops = None
        self.refine = RefineConfig.from_config(cfg)

    def draw(self, t: int):
        c_seed, n_seed = trial_seeds(self.cfg.seed, t)
        ch = build_realization(self.cfg, sample_paths(self.cfg, c_seed), self.link, seed=c_seed)
        meas = simulate_training(ch, self.sched, n_seed, Vtilde=self.Vtilde)
        self.Vtilde = meas.Vtilde
        return ch, meas, n_seed

    def context(self, meas) -> MatchingContext:
        if self.ctx is None:
            self.ctx = MatchingContext(meas.Vtilde, meas.F, self.dicts)
        return self.ctx

    def full_measurement(self, ch, n_seed):
        cfg = self.cfg
        if self.full_sched is None:
            self.full_sched = make_schedule(cfg, self.link, schedule_seed(cfg.seed) + 1,
                                            Q=cfg.n_r, n_x=max(cfg.n_x, cfg.n_u))
        meas = simulate_training(ch, self.full_sched, n_seed, Vtilde=self.full_Vtilde)
        if self.full_ops is None:
            self.full_ops = ls_operators(meas.Vtilde, meas.F)
        self.full_Vtilde = meas.Vtilde
        return meas

    def run_trial(self, t: int, methods) -> dict:
        ch, meas, n_seed = self.draw(t)
        out = {}
        for m in methods:
            t0 = time.perf_counter()
            if m == "2D-OLS":
                out[m] = {"nmse": estimate_2dols(meas, self.cfg, ch.paths).score(ch.H_U).nmse}
            elif m in ("CC-MMPSR", "IN-MMPSR"):
                res = mmpsr(meas, self.dicts, self.cfg.P, m[:2], self.refine, self.context(meas))
                res.score(ch.H_U)
                out[m] = {"nmse": res.nmse, "match_time": res.timings["match"],
                          **angle_errors(ch.paths, res.support)}
            elif m == "K-OMP":
                try:
                    out[m] = {"nmse": estimate_komp(meas, self.dicts, self.cfg.P).score(ch.H_U).nmse}
                except MemoryError:
                    out[m] = {"nmse": float("nan")}
            elif m == "2D-LS":
                full = self.full_measurement(ch, n_seed)
                out[m] = {"nmse": float(nmse_per_k(ch.H_U, estimate_2dls(full, self.full_ops)).mean())}
            elif m == "LB":
                out[m] = {"nmse": lower_bound(self.cfg, ch, self.sched, meas.noise_var, meas.Vtilde)}
            out[m]["time"] = time.perf_counter() - t0
        return out


def _aggregate(experiment, param, value, method, recs, trials) -> dict:
    vals = np.array([r["nmse"] for r in recs], dtype=float)
    row = {"experiment": experiment, "param": param, "value": value, "method": method, "trials": trials,
           "median_nmse": float(np.median(vals)), "mean_nmse": float(np.mean(vals))}
    for k in ANGLE_KEYS:
        if recs and k in recs[0]:
            row[f"mse_{k}"] = float(np.mean([r[k] for r in recs]))
    return row


def _value_cfg(cfg: SystemConfig, param: str, value) -> SystemConfig:
    if param not in cfg.to_dict():
        raise ValueError(f"cannot sweep unknown config field {param!r}")
    cast = type(getattr(cfg, param))
    return cfg.replace(**{param: cast(value)})


def _monte_carlo(spec: ExperimentSpec, cfg: SystemConfig, per_trial=None) -> list[dict]:
    rows = []
    for v in spec.values:
        vcfg = _value_cfg(cfg, spec.param, v)
        need = any(m in ("CC-MMPSR", "IN-MMPSR", "K-OMP") for m in spec.methods)
        runner = TrialRunner(vcfg, need_dicts=need)
        recs = {m: [] for m in spec.methods}
        for t in range(vcfg.trials):
            res = runner.run_trial(t, spec.methods)
            for m in spec.methods:
                recs[m].append(res[m])
            if per_trial is not None:
                per_trial(v, t, res)
        for m in spec.methods:
            rows.append(_aggregate(spec.experiment, spec.param, v, m, recs[m], vcfg.trials))
        if "LB" in spec.methods and "2D-OLS" in spec.methods:
            ok = [lb["nmse"] <= o["nmse"] for lb, o in zip(recs["LB"], recs["2D-OLS"])]
            rows[-1]["lb_below_ols"] = int(sum(ok))
    return rows


def gain_vs_distance(cfg: SystemConfig, ris_sizes, distances, draws: int = 1000,
                     seed: int | None = None) -> list[GainCurvePoint]:
    """Mean ``|det(Bt^H Bb)|`` over random path directions at the centre frequency.

    ``Bt`` holds far-field RIS responses at the true angles and ``Bb`` exact
    spherical responses at the true angles and distance ``d``. Each size is
    given as ``n_y`` (with ``cfg.ris_nz`` columns) or an ``(n_y, n_z)`` pair.
    The same ``draws`` direction sets are reused for every size and distance.
    """
    seed = cfg.seed if seed is None else seed
    dirs = [sample_paths(cfg, s) for s in np.random.SeedSequence([seed, 7]).generate_state(draws)]
    tt = np.array([[p.ris_point.theta_t for p in ps] for ps in dirs]).ravel()
    pp = np.array([[p.ris_point.phi_t for p in ps] for ps in dirs]).ravel()
    P = cfg.P
    out = []
    for size in ris_sizes:
        n_y, n_z = (size, cfg.ris_nz) if np.ndim(size) == 0 else size
        shape = cfg.replace(ris_ny=int(n_y), ris_nz=int(n_z)).ris
        Bt = response_from_path(fresnel_path_difference(shape, tt, pp, 0.0), cfg.f_c)
        Bt = Bt.T.reshape(draws, P, -1)
        for d in distances:
            Bb = response_from_path(exact_path_difference(shape, tt, pp, float(d)), cfg.f_c)
            Bb = Bb.T.reshape(draws, P, -1)
            G = np.einsum("dpn,dqn->dpq", Bt.conj(), Bb)
            out.append(GainCurvePoint(float(d), int(n_y), int(n_z), float(np.abs(np.linalg.det(G)).mean())))
    return out


def matching_time(cfg: SystemConfig, trials: int = 3, repeats: int = 3) -> float:
    """Median wall time of the MMPSR atom-matching stage (score summation plus argmax)."""
    runner = TrialRunner(cfg)
    times = []
    for t in range(trials):
        _, meas, _ = runner.draw(t)
        ctx = runner.context(meas)
        sub = svd_subspace(meas.Y, cfg.P)
        best = np.inf
        for _ in range(repeats):
            t0 = time.perf_counter()
            s_R, s_U = ctx.summed_scores(sub, "CC")
            distinct_argmax(s_R)
            distinct_argmax(s_U)
            best = min(best, time.perf_counter() - t0)
        times.append(best)
    return float(np.median(times))


def run_experiment(spec: ExperimentSpec, cfg: SystemConfig, out_dir=None) -> list[dict]:
    """Run ``spec`` under ``cfg``; optionally write ``<experiment>.csv`` and ``<experiment>.json``."""
    t0 = time.perf_counter()
    exp = spec.experiment
    if exp in ("nmse_vs_Q", "nmse_vs_K", "nmse_vs_power", "angle_mse", "lb_vs_ols"):
        rows = _monte_carlo(spec, cfg)
    elif exp == "trajectory_map":
        rows = []
        for v in spec.values:
            th, ph, r = (float(x) for x in v)
            for tr in trajectory(cfg, SphericalPoint(np.radians(th), np.radians(ph), r)):
                rows.append({"experiment": exp, "param": spec.param, "value": f"{th}/{ph}/{r}", **tr})
    elif exp == "gain_vs_distance":
        pts = gain_vs_distance(cfg, [int(v) for v in spec.values], spec.distances)
        rows = [{"experiment": exp, "param": spec.param, "value": p.ris_ny, "ris_nz": p.ris_nz,
                 "distance": p.distance, "gain": p.gain} for p in pts]
    elif exp == "complexity_scan":
        rows = []
        for v in spec.values:
            vcfg = _value_cfg(cfg, spec.param, v)
            g_r = DictionaryPair.from_config(vcfg).ris.size
            rows.append({"experiment": exp, "param": spec.param, "value": v, "method": "CC-MMPSR",
                         "G_R": g_r, "match_time": matching_time(vcfg, trials=min(vcfg.trials, 3))})
    else:  # pragma: no cover - guarded by ExperimentSpec
        raise ValueError(exp)
    if out_dir is not None:
        write_outputs(rows, spec, cfg, out_dir, elapsed=time.perf_counter() - t0)
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    fields: list[str] = []
    for r in rows:
        fields += [k for k in r if k not in fields]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def _git_describe() -> str:
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                             cwd=Path(__file__).parent, timeout=5)
        return res.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def write_outputs(rows, spec: ExperimentSpec, cfg: SystemConfig, out_dir, elapsed: float = 0.0):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{spec.experiment}.csv"
    csv_path.write_text(rows_to_csv(rows))
    manifest = {"schema": "xlris.run/1", "spec": spec.to_dict(), "config": cfg.to_dict(),
                "config_hash": cfg.config_hash(), "seed": cfg.seed, "git": _git_describe(),
                "elapsed_s": elapsed, "csv": csv_path.name}
    man_path = out / f"{spec.experiment}.json"
    man_path.write_text(json.dumps(manifest, indent=2))
    return csv_path, man_path
