"""Command-line front end.

Exit codes: 0 success, 1 runtime failure, 2 configuration error.
Seed precedence: --seed flag > QKSA_SEED environment variable > config.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import tomography
from .costexpr import CostExprError
from .environment import EnvError, QuantumProcessEnv, load_env_config
from .gene import Gene, GeneError
from .hypervisor import Hypervisor, HypervisorError, load_run_config
from .tomography import ReconstructionReport, choi_trace_distance

OK, RUNTIME_ERROR, CONFIG_ERROR = 0, 1, 2


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _resolve_seed(flag_seed: int | None, config_seed: int) -> int:
    if flag_seed is not None:
        return flag_seed
    env_seed = os.environ.get("QKSA_SEED")
    if env_seed is not None:
        return int(env_seed)
    return config_seed


def _parse_shots(text: str) -> list[int | None]:
    if text.strip() == "exact":
        return [None]
    try:
        values = [int(v) for v in text.split(",")]
    except ValueError:
        raise ValueError(f"bad --shots value {text!r}: expected 'exact' or ints")
    if any(v < 1 for v in values):
        raise ValueError("--shots values must be >= 1")
    return values


def _write_csv(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def cmd_tomo(args: argparse.Namespace) -> int:
    try:
        config = load_env_config(args.env)
        shots_list = _parse_shots(args.shots)
    except (EnvError, ValueError) as exc:
        return _fail(CONFIG_ERROR, str(exc))
    if args.method == "eapt" and not config.entangled_mode:
        return _fail(CONFIG_ERROR, "eapt requires an entangled_mode environment")
    if args.method in ("qst", "sqpt") and config.entangled_mode:
        return _fail(CONFIG_ERROR, f"{args.method} requires a standard environment")

    seed = _resolve_seed(args.seed, config.seed)
    out_dir = Path(args.output)
    try:
        truth = config.resolve_channel()
        rows = []
        report = None
        for shots in shots_list:
            env = QuantumProcessEnv(replace(config, seed=seed))
            if args.method == "qst":
                budget = tomography.qst_budget(env.n_qubits, shots)
                rho = tomography.qst_from_env(env, shots, prep_index=args.prep)
                from .environment import prep_state
                from .linalg import trace_distance

                true_out = truth.apply(prep_state(args.prep, env.n_qubits))
                dist = trace_distance(rho.matrix, true_out.matrix)
                choi = rho
            else:
                if args.method == "sqpt":
                    budget = tomography.sqpt_budget(env.n_qubits, shots)
                    model = tomography.sqpt(env, shots)
                else:
                    budget = tomography.eapt_budget(env.n_qubits, shots)
                    model = tomography.eapt(env, shots)
                dist = choi_trace_distance(model, truth)
                choi = model.choi_density()
            rows.append([str(shots if shots is not None else "exact"), _fmt(dist)])
            report = ReconstructionReport(
                method=args.method,
                n_qubits=env.n_qubits,
                settings_count=budget.settings_count,
                shots_per_setting=shots,
                choi=choi,
                trace_distance_to_truth=dist,
            )
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "report.json").write_text(report.to_json_text() + "\n")
        _write_csv(out_dir / "trace_distance.csv", ["shots", "trace_distance"], rows)
    except Exception as exc:  # noqa: BLE001 - boundary: report and signal failure
        return _fail(RUNTIME_ERROR, f"{type(exc).__name__}: {exc}")
    print(f"wrote {out_dir / 'report.json'} and {out_dir / 'trace_distance.csv'}")
    return OK


def cmd_run(args: argparse.Namespace) -> int:
    try:
        config = load_run_config(args.config)
    except HypervisorError as exc:
        return _fail(CONFIG_ERROR, str(exc))
    if args.steps is not None:
        if args.steps < 0:
            return _fail(CONFIG_ERROR, "--steps must be >= 0")
        config = replace(config, step_budget=args.steps)
    if args.seed is not None or os.environ.get("QKSA_SEED") is not None:
        config = replace(
            config, master_seed=_resolve_seed(args.seed, config.master_seed)
        )
    out_dir = Path(args.output_dir)
    try:
        result = Hypervisor(config).run()
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "lineage.jsonl").write_text(result.lineage_text())
        _write_csv(
            out_dir / "events.csv",
            ["agent_id", "t", "action", "prediction", "percept", "reward",
             "return", "c_est_star", "event"],
            [rec.as_row() for rec in result.sorted_records()],
        )
        _write_csv(
            out_dir / "summary.csv",
            ["step", "alive", "best_return", "mean_cost"],
            [
                [str(s["step"]), str(s["alive"]), _fmt(s["best_return"]),
                 _fmt(s["mean_cost"])]
                for s in result.summary
            ],
        )
    except Exception as exc:  # noqa: BLE001 - boundary: report and signal failure
        return _fail(RUNTIME_ERROR, f"{type(exc).__name__}: {exc}")
    print(
        f"ran {config.step_budget} steps: {len(result.lineage)} agents, "
        f"{len(result.records)} cycles -> {out_dir}"
    )
    return OK


def cmd_validate(args: argparse.Namespace) -> int:
    path = Path(args.config)
    if not path.exists():
        return _fail(CONFIG_ERROR, f"config file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        return _fail(CONFIG_ERROR, f"not valid JSON: {exc}")
    findings: list[str] = []
    kind = None
    try:
        if isinstance(data, dict) and "gene" in data and "environment" in data:
            kind = "run config"
            load_run_config(path)
        elif isinstance(data, dict) and "channel" in data:
            kind = "environment config"
            load_env_config(path)
        elif isinstance(data, dict) and "cost" in data:
            kind = "gene"
            Gene.from_dict(data)
        else:
            findings.append("unrecognized config shape (expected run/env/gene)")
    except (HypervisorError, EnvError, GeneError, CostExprError) as exc:
        findings.append(str(exc))
    if findings:
        for f in findings:
            print(f"invalid: {f}", file=sys.stderr)
        return CONFIG_ERROR
    print(f"valid {kind}: {path}")
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qksa",
        description="Tomography benchmarks and evolving-agent runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    tomo = sub.add_parser("tomo", help="run one reconstruction benchmark")
    tomo.add_argument("--method", required=True, choices=("qst", "sqpt", "eapt"))
    tomo.add_argument("--env", required=True, help="environment config (JSON)")
    tomo.add_argument("--shots", default="exact",
                      help="'exact' or comma-separated shot counts")
    tomo.add_argument("--prep", type=int, default=0,
                      help="preparation index for qst (default 0)")
    tomo.add_argument("--output", required=True, help="output directory")
    tomo.add_argument("--seed", type=int, default=None)
    tomo.set_defaults(func=cmd_tomo)

    run = sub.add_parser("run", help="run a population simulation")
    run.add_argument("--config", required=True, help="run config (JSON)")
    run.add_argument("--output-dir", required=True)
    run.add_argument("--steps", type=int, default=None,
                     help="override the config step budget")
    run.add_argument("--seed", type=int, default=None)
    run.set_defaults(func=cmd_run)

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("config")
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
