"""Command-line front end: run, sweep, denoise, validate.

Exit codes: 0 success, 2 config error, 3 runtime divergence, 4 I/O error.
All numbers are serialized with 17 significant digits, so reruns of the
same config produce byte-identical files. Node indices on the command line
are 1-based, matching the edge-list file format.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from diffusion_lms import __version__
from diffusion_lms.analysis import MsdTrace
from diffusion_lms.config import ConfigError, format_config, parse_config
from diffusion_lms.experiment import (
    EnsembleDivergence,
    denoise_speech,
    run_ensemble,
    sweep_leakage,
    sweep_step_size,
)
from diffusion_lms.signals import wav_bytes

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_IO = 4

MANIFEST_NAME = "manifest.json"
RESOLVED_CONFIG_NAME = "resolved_config.cfg"


def _fmt(value: float) -> str:
    if value == float("-inf"):
        return "-inf"
    return format(value, ".17g")


def _load_config(args: argparse.Namespace):
    cfg = parse_config(args.config)
    if args.seed is not None:
        cfg = replace(cfg, base_seed=args.seed)
    return cfg


def _write_outputs(
    out_dir: Path, files: dict[str, str | bytes], command: str, base_seed: int, cfg_text: str
) -> list[str]:
    """Write all prepared files plus the manifest; nothing touches disk
    before every payload is ready."""
    out_dir.mkdir(parents=True, exist_ok=True)
    names = sorted(files)
    manifest = {
        "artifact": "diffusion-lms",
        "version": __version__,
        "command": command,
        "base_seed": base_seed,
        "config": cfg_text,
        "outputs": names,
    }
    for name in names:
        payload = files[name]
        if isinstance(payload, bytes):
            (out_dir / name).write_bytes(payload)
        else:
            (out_dir / name).write_text(payload, encoding="ascii")
    (out_dir / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="ascii"
    )
    return names + [MANIFEST_NAME]


def _trace_csv(trace: MsdTrace) -> str:
    lines = ["iteration,msd_db"]
    for i, value in enumerate(trace.per_iteration_db, start=1):
        lines.append(f"{i},{_fmt(value)}")
    return "\n".join(lines) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    results = run_ensemble(cfg)
    cfg_text = format_config(cfg)

    traces = {k: v for k, v in results.items() if isinstance(v, MsdTrace)}
    failures = {k: v for k, v in results.items() if isinstance(v, EnsembleDivergence)}

    files: dict[str, str] = {RESOLVED_CONFIG_NAME: cfg_text}
    for label, trace in traces.items():
        files[f"trace_{label}.csv"] = _trace_csv(trace)
    if traces:
        labels = [label for label in cfg.algorithms if label in traces]
        lines = ["iteration," + ",".join(labels)]
        length = len(next(iter(traces.values())).per_iteration_db)
        for i in range(length):
            row = [str(i + 1)] + [_fmt(traces[label].per_iteration_db[i]) for label in labels]
            lines.append(",".join(row))
        files["comparison.csv"] = "\n".join(lines) + "\n"

    written = _write_outputs(Path(args.out), files, "run", cfg.base_seed, cfg_text)
    for name in written:
        print(name)
    for label, trace in traces.items():
        if trace.divergent_trials:
            print(
                f"note: {label}: {trace.divergent_trials}/{trace.trials} trials diverged and were excluded",
                file=sys.stderr,
            )
    if failures:
        for label, failure in failures.items():
            print(
                f"error: {label}: all {failure.trials} trials diverged"
                f" (first at iteration {failure.first_iteration}, node {failure.node})",
                file=sys.stderr,
            )
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    try:
        grid = tuple(float(v) for v in args.grid.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"--grid: not a numeric list: {args.grid!r}") from None
    if not grid:
        raise ConfigError("--grid: must list at least one value")
    if args.param == "mu":
        results = sweep_step_size(cfg, grid)
    else:
        results = sweep_leakage(cfg, grid)

    cfg_text = format_config(cfg)
    files: dict[str, str] = {RESOLVED_CONFIG_NAME: cfg_text}
    for label, points in results.items():
        lines = ["param,steady_state_db"]
        for value, db in points:
            lines.append(f"{_fmt(value)},{'divergent' if db is None else _fmt(db)}")
        files[f"sweep_{args.param}_{label}.csv"] = "\n".join(lines) + "\n"

    written = _write_outputs(Path(args.out), files, f"sweep_{args.param}", cfg.base_seed, cfg_text)
    for name in written:
        print(name)
    return EXIT_OK


def cmd_denoise(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    if not 1 <= args.node <= cfg.nodes:
        raise ConfigError(f"--node: {args.node} out of range 1..{cfg.nodes}")
    result = denoise_speech(cfg, args.node - 1)

    cfg_text = format_config(cfg)
    lines = ["t,noisy,filtered,residual"]
    for t in range(result.noisy.shape[0]):
        lines.append(
            f"{t},{_fmt(result.noisy[t])},{_fmt(result.filtered[t])},{_fmt(result.residual[t])}"
        )
    files: dict[str, str | bytes] = {
        RESOLVED_CONFIG_NAME: cfg_text,
        f"denoise_node{args.node}.csv": "\n".join(lines) + "\n",
    }
    if result.sample_rate is not None:
        for name, data in (
            ("noisy", result.noisy),
            ("filtered", result.filtered),
            ("residual", result.residual),
        ):
            files[f"denoise_node{args.node}_{name}.wav"] = wav_bytes(data, result.sample_rate)
    written = _write_outputs(Path(args.out), files, "denoise", cfg.base_seed, cfg_text)
    for name in written:
        print(name)

    if not np.isfinite(result.filtered).all():
        print("error: filter output is not finite (divergent run)", file=sys.stderr)
        return EXIT_DIVERGENCE
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    print(format_config(cfg), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffusion-lms",
        description="Diffusion LMS / leaky diffusion LMS network simulator",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, out: bool = True) -> None:
        p.add_argument("--config", required=True, help="experiment config file")
        p.add_argument("--seed", type=int, default=None, help="override base_seed")
        if out:
            p.add_argument("--out", required=True, help="output directory")

    p_run = sub.add_parser("run", help="ensemble learning curves to CSV")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="steady-state MSD over a parameter grid")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=("mu", "gamma"))
    p_sweep.add_argument("--grid", required=True, help="comma-separated values")
    p_sweep.set_defaults(func=cmd_sweep)

    p_dn = sub.add_parser("denoise", help="single-run noisy/filtered/residual output")
    common(p_dn)
    p_dn.add_argument("--node", required=True, type=int, help="node index (1-based)")
    p_dn.set_defaults(func=cmd_denoise)

    p_val = sub.add_parser("validate", help="parse the config and echo it resolved")
    common(p_val, out=False)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
