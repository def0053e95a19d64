"""Scenario presets and run-artifact assembly."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .. import __version__, _kernels
from ..emitter import Projector, build_projector
from ..metrics import (
    Scenario,
    default_thresholds,
    dynamic_range,
    estimated_projections,
    pd_at_pfa,
    radiation_pattern,
    roc_from_statistics,
    simulate_statistics,
    zeta_ratio,
)
from ..scene import ChannelSet, Scene, normalize_backscatter, synthesize_channels
from ..waveform import GAMMA_MEAN, calibrate_powers, make_phase_plan, make_waveforms
from .config import ScenarioConfig, dump_config, validate
from .csvio import DYNAMIC_RANGE_COLUMNS, RADIATION_COLUMNS, ROC_COLUMNS, Table, emit_csv

PRESETS = ("fig3", "fig4", "fig5", "fig6", "custom")

DEFAULT_TRIALS_ZETA = 1000
DEFAULT_TRIALS_ROC = 10_000
DEFAULT_TRIALS_CUSTOM_ROC = 1000

FIG3_CONFIGS = ((8, 16, 2), (16, 16, 3), (16, 8, 2))
FIG4_KS = (1, 2, 3, 4)
FIG5_PERFECT_KS = (1, 2, 3, 4)
SNR_P_SWEEP_DB = (5.0, 20.0)
ROC_SUMMARY_PFA = 0.1
# floor for radiated energy at exact nulls before taking dB
E_T_FLOOR = 1e-300


@dataclass(frozen=True)
class RunArtifact:
    out_dir: Path
    run_id: str
    preset: str
    seed: int
    files: tuple

    def path(self, name: str) -> Path:
        return self.out_dir / name


def db(x):
    return 10.0 * np.log10(x)


def build_scene(cfg: ScenarioConfig, M: int | None = None, N: int | None = None, bd=None) -> Scene:
    return Scene(
        panA_center=cfg.panA_center,
        panB_center=cfg.panB_center,
        M=cfg.M if M is None else M,
        N=cfg.N if N is None else N,
        d_ant=cfg.d_ant,
        wavelength=cfg.wavelength,
        bd_position=cfg.bd_position if bd is None else tuple(bd),
        reflector_y=cfg.reflector_y,
        g_smc=cfg.g_smc,
    )


def build_channels(cfg: ScenarioConfig, scene: Scene) -> ChannelSet:
    ch = synthesize_channels(scene)
    return normalize_backscatter(ch) if cfg.normalize_backscatter else ch


def build_setup(cfg: ScenarioConfig, ch: ChannelSet, snr_p_db: float):
    plan = make_phase_plan(cfg.J_p, cfg.J_d, cfg.tau_p, cfg.tau_d)
    plan.check_dimensions(ch.M, ch.N)
    p1, p2 = calibrate_powers(ch, plan, 10 ** (snr_p_db / 10), 10 ** (cfg.snr_d_db / 10))
    return plan, make_waveforms(ch.M, ch.N, plan, p1, p2)


def _radiation_alpha_d(cfg: ScenarioConfig, M: int) -> float:
    # patterns are drawn with unit-mean-square backscatter gains
    p_t = 10 ** (cfg.snr_d_db / 10) / (cfg.J_d * cfg.tau_d * GAMMA_MEAN)
    return p_t * cfg.tau_d / M


def _add_pattern(table: Table, cfg: ScenarioConfig, projector: Projector, label: str) -> None:
    theta_deg = cfg.theta_grid()
    pattern = radiation_pattern(projector, np.deg2rad(theta_deg), cfg.d_ant, _radiation_alpha_d(cfg, projector.M))
    for theta, e_t in zip(theta_deg, pattern[:, 1]):
        table.add(theta, db(max(e_t, E_T_FLOOR)), label)


def radiation_table(cfg: ScenarioConfig, configs) -> Table:
    """Patterns for ``(M, N, K)`` triples; ``K = 0`` is the unprojected array."""
    table = Table(RADIATION_COLUMNS)
    for M, N, K in configs:
        if K == 0:
            projector, label = Projector.identity(M), f"M={M} N={N} none"
        else:
            ch = synthesize_channels(build_scene(cfg, M, N))
            projector, label = build_projector(ch.G_AB, K), f"M={M} N={N} K={K}"
        _add_pattern(table, cfg, projector, label)
    return table


def dynamic_range_table(cfg: ScenarioConfig, entries, trials: int, seed: int) -> Table:
    """Dynamic range over the BD y sweep.

    ``entries`` holds ``(mode, K, snr_p_db)``. Estimated projectors depend
    only on the P1 link, so one stack of ``trials`` projectors is reused
    across every BD position.
    """
    table = Table(DYNAMIC_RANGE_COLUMNS)
    x_bd = cfg.bd_position[0]
    ys = cfg.y_sweep()
    base = build_channels(cfg, build_scene(cfg))
    for mode, K, snr_p_db in entries:
        plan, wf = build_setup(cfg, base, snr_p_db)
        if mode == "estimated":
            stack = estimated_projections(base, wf, plan, K, trials, seed)
        for y in ys:
            ch = build_channels(cfg, build_scene(cfg, bd=(x_bd, y)))
            if mode == "estimated":
                zeta, n = float(np.mean(zeta_ratio(ch.G_AB, ch.cascade, stack, wf.Psi))), trials
            else:
                zeta, n = dynamic_range(ch, wf, plan, mode, K).zeta_linear, 1
            table.add(y, mode, K, snr_p_db, db(zeta), n)
    return table


@dataclass(frozen=True)
class RocResult:
    mode: str
    snr_p_db: float
    h0: np.ndarray
    h1: np.ndarray
    thresholds: np.ndarray


def roc_tables(cfg: ScenarioConfig, entries, trials: int, seed: int, threads: int):
    """ROC, per-trial statistic and P_D-at-P_FA tables for ``(mode, snr_p_db)`` entries."""
    ch = build_channels(cfg, build_scene(cfg))
    results = []
    for mode, snr_p_db in entries:
        plan, wf = build_setup(cfg, ch, snr_p_db)
        scn = Scenario(ch, plan, wf, cfg.K, mode, cfg.detector_mode, cfg.epsilon, cfg.max_iters)
        h0, h1 = simulate_statistics(scn, trials, seed, threads)
        thr = np.asarray(cfg.thresholds) if cfg.thresholds is not None else default_thresholds(h0, h1)
        results.append(RocResult(mode, snr_p_db, h0, h1, thr))

    roc = Table(ROC_COLUMNS)
    stats = Table(("mode", "snr_p_db", "trial", "hypothesis", "log_glr"))
    summary = Table(("mode", "snr_p_db", "p_fa", "p_d", "trials"))
    for r in results:
        curve = roc_from_statistics(r.h0, r.h1, r.thresholds)
        for thr, p_fa, p_d in curve.points:
            roc.add(r.mode, r.snr_p_db, thr, p_fa, p_d, trials)
        for t in range(trials):
            stats.add(r.mode, r.snr_p_db, t, 0, r.h0[t])
            stats.add(r.mode, r.snr_p_db, t, 1, r.h1[t])
        summary.add(r.mode, r.snr_p_db, ROC_SUMMARY_PFA, pd_at_pfa(r.h0, r.h1, ROC_SUMMARY_PFA), trials)
    return roc, stats, summary


def run_id(preset: str, cfg: ScenarioConfig) -> str:
    digest = hashlib.sha1((preset + "\n" + dump_config(cfg)).encode("utf-8"))
    return digest.hexdigest()[:12]


def _tables_for(preset: str, cfg: ScenarioConfig, trials, threads: int) -> dict:
    seed = cfg.seed
    if preset == "fig3":
        unprojected = {M: (M, N, 0) for M, N, _ in reversed(FIG3_CONFIGS)}
        configs = list(FIG3_CONFIGS) + sorted(unprojected.values())
        return {"radiation.csv": radiation_table(cfg, configs)}
    if preset == "fig4":
        configs = [(cfg.M, cfg.N, 0)] + [(cfg.M, cfg.N, K) for K in FIG4_KS]
        return {"radiation.csv": radiation_table(cfg, configs)}
    if preset == "fig5":
        n = trials or DEFAULT_TRIALS_ZETA
        entries = [("none", 0, cfg.snr_p_db)]
        entries += [("perfect", K, cfg.snr_p_db) for K in FIG5_PERFECT_KS]
        entries += [("estimated", cfg.K, s) for s in SNR_P_SWEEP_DB]
        return {"dynamic_range.csv": dynamic_range_table(cfg, entries, n, seed)}
    if preset == "fig6":
        n = trials or DEFAULT_TRIALS_ROC
        entries = [(m, s) for s in SNR_P_SWEEP_DB for m in ("perfect", "estimated", "none")]
        roc, stats, summary = roc_tables(cfg, entries, n, seed, threads)
        return {"roc.csv": roc, "roc_summary.csv": summary, "roc_statistics.csv": stats}
    if preset == "custom":
        n_zeta = trials or DEFAULT_TRIALS_ZETA
        n_roc = trials or DEFAULT_TRIALS_CUSTOM_ROC
        K = cfg.K if cfg.projection_mode != "none" else 0
        out = {"radiation.csv": radiation_table(cfg, [(cfg.M, cfg.N, K)])}
        sweep = cfg if cfg.bd_y_sweep is not None else replace(cfg, bd_y_sweep=(cfg.bd_position[1],))
        out["dynamic_range.csv"] = dynamic_range_table(
            sweep, [(cfg.projection_mode, K, cfg.snr_p_db)], n_zeta, seed
        )
        roc, stats, summary = roc_tables(cfg, [(cfg.projection_mode, cfg.snr_p_db)], n_roc, seed, threads)
        out.update({"roc.csv": roc, "roc_summary.csv": summary, "roc_statistics.csv": stats})
        return out
    raise ValueError(f"unknown preset {preset!r}; expected one of {PRESETS}")


def run_scenario(
    cfg: ScenarioConfig,
    preset: str,
    out_dir,
    seed: int | None = None,
    trials: int | None = None,
    threads: int = 1,
) -> RunArtifact:
    """Run a preset and write its CSVs, the config echo and ``run.json`` to ``out_dir``.

    ``seed`` and ``trials`` override the config; the echoed config holds
    the effective values so reloading it reproduces the run.
    """
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; expected one of {PRESETS}")
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    if trials is not None:
        cfg = replace(cfg, trials=int(trials))
    cfg = validate(cfg)
    tables = _tables_for(preset, cfg, cfg.trials, max(1, int(threads)))

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for name, table in tables.items():
        emit_csv(table, out_dir / name)
        files.append(name)
    (out_dir / "config.json").write_text(dump_config(cfg), encoding="utf-8", newline="\n")
    rid = run_id(preset, cfg)
    meta = {
        "run_id": rid,
        "preset": preset,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "files": sorted(files),
        "backend": _kernels.backend(),
        "version": __version__,
    }
    (out_dir / "run.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")
    return RunArtifact(out_dir, rid, preset, cfg.seed, tuple(sorted(files)))
