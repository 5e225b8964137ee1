"""Command line front end.

Five subcommands: ``generate`` writes a synthetic instance JSON, ``solve``
runs one algorithm on an instance file (optionally writing the iteration
trace as CSV), ``equiv`` runs the lockstep equivalence audit, ``sweep``
runs the Monte-Carlo experiment from a JSON config, and ``correspond``
runs the per-row belief identity trials.

Humans get one summary line on stdout; machine-readable data goes only to
files.  Exit codes: 0 success (and audit/identity pass), 2 usage or
configuration error, 3 input/output error, 4 solver divergence (a partial
trace is still written when requested), 5 audit or identity failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .aiga import AigaConfig, run_aiga
from .amp import AmpConfig, run_amp
from .errors import ConfigError, DivergenceError, SchemaError
from .harness import (
    ExperimentConfig,
    audit_equivalence,
    run_correspondence,
    run_experiment,
)
from .iga import IgaConfig, run_iga
from .model import SyntheticConfig, generate_instance, load_instance, save_instance
from .trace import fmt17

_SWEEP_REQUIRED_KEYS = {
    "m",
    "n",
    "rho",
    "kappa",
    "snr_db_list",
    "sample_count",
    "max_iter",
    "algorithms",
    "seed",
}
_SWEEP_OPTIONAL_KEYS = {"output"}


@dataclass(frozen=True)
class CliInvocation:
    """Parsed command line: subcommand name, non-path flags, and the
    input/output paths split out."""

    subcommand: str
    flags: dict = field(default_factory=dict)
    input_path: str | None = None
    output_path: str | None = None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="igabench",
        description="l1-penalized least-squares solver workbench",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    gen = sub.add_parser("generate", help="write a synthetic instance JSON")
    gen.add_argument("--m", type=int, required=True, help="measurement count")
    gen.add_argument("--n", type=int, required=True, help="signal length")
    gen.add_argument("--rho", type=float, required=True, help="signal support probability in (0, 1]")
    gen.add_argument("--snr-db", type=float, required=True, help="SNR target in dB (inf = noiseless)")
    gen.add_argument("--kappa", type=float, required=True, help="l1 penalty weight")
    gen.add_argument("--seed", type=int, required=True, help="master seed")
    gen.add_argument("--out", required=True, help="instance JSON output path")

    solve = sub.add_parser("solve", help="run one solver on an instance file")
    solve.add_argument("--algo", choices=["iga", "aiga", "amp"], required=True)
    solve.add_argument("--in", dest="input", required=True, help="instance JSON path")
    solve.add_argument("--iters", type=int, required=True, help="maximum iterations")
    solve.add_argument("--damping", type=float, default=None, help="damping factor in (0, 1] (iga only)")
    solve.add_argument("--tol", type=float, default=1e-8, help="relative-change stop (0 disables)")
    solve.add_argument("--trace-out", dest="trace_out", default=None, help="iteration trace CSV path")

    equiv = sub.add_parser("equiv", help="lockstep equivalence audit on an instance file")
    equiv.add_argument("--in", dest="input", required=True, help="instance JSON path")
    equiv.add_argument("--iters", type=int, required=True, help="lockstep steps")
    equiv.add_argument("--tol", type=float, default=1e-8, help="audit threshold")

    sweep = sub.add_parser("sweep", help="Monte-Carlo NMSE sweep from a JSON config")
    sweep.add_argument("--config", required=True, help="sweep config JSON path")
    sweep.add_argument("--out", default=None, help="results CSV path (overrides config output)")

    cor = sub.add_parser("correspond", help="per-row belief identity trials")
    cor.add_argument("--trials", type=int, required=True, help="number of random rows")
    cor.add_argument("--seed", type=int, required=True, help="master seed")

    return parser


_PATH_KEYS = ("input", "out", "trace_out", "config")


def parse_invocation(argv) -> CliInvocation:
    """argparse front; usage errors exit with code 2 via SystemExit."""
    namespace = build_parser().parse_args(argv)
    values = vars(namespace)
    subcommand = values.pop("subcommand")
    input_path = values.pop("input", None) or values.pop("config", None)
    output_path = values.pop("out", None) or values.pop("trace_out", None)
    flags = {key: val for key, val in values.items() if key not in _PATH_KEYS}
    return CliInvocation(subcommand, flags, input_path, output_path)


def cmd_generate(inv: CliInvocation) -> int:
    flags = inv.flags
    cfg = SyntheticConfig(
        m=flags["m"],
        n=flags["n"],
        rho=flags["rho"],
        snr_db=flags["snr_db"],
        kappa=flags["kappa"],
        seed=flags["seed"],
    )
    inst = generate_instance(cfg)
    save_instance(inst, inv.output_path)
    print(
        f"generated m={inst.m} n={inst.n} rho={fmt17(cfg.rho)} kappa={fmt17(inst.kappa)} "
        f"sigma_z2={fmt17(inst.sigma_z2)} seed={cfg.seed} -> {inv.output_path}"
    )
    return 0


def _solver_config(algo: str, flags: dict):
    iters = flags["iters"]
    tol = flags["tol"]
    damping = flags.get("damping")
    if algo == "iga":
        if damping is None:
            damping = 1.0
        return IgaConfig(max_iter=iters, damping=damping, tol=tol)
    if damping is not None:
        raise ConfigError(f"--damping applies only to iga, not {algo}")
    if algo == "aiga":
        return AigaConfig(max_iter=iters, tol=tol)
    return AmpConfig(max_iter=iters, tol=tol)


def cmd_solve(inv: CliInvocation) -> int:
    algo = inv.flags["algo"]
    cfg = _solver_config(algo, inv.flags)
    inst = load_instance(inv.input_path)
    runner = {"iga": run_iga, "aiga": run_aiga, "amp": run_amp}[algo]
    try:
        trace = runner(inst, cfg)
    except DivergenceError as exc:
        if inv.output_path is not None and exc.trace is not None:
            exc.trace.write_csv(inv.output_path)
        where = "" if exc.iteration is None else f" at iteration {exc.iteration}"
        print(f"error: {algo} diverged{where}: {exc}", file=sys.stderr)
        return 4
    if inv.output_path is not None:
        trace.write_csv(inv.output_path)
    last = trace.records[-1]
    nmse_part = "" if last.nmse is None else f" nmse={fmt17(last.nmse)}"
    dest = "" if inv.output_path is None else f" trace -> {inv.output_path}"
    print(
        f"{algo} converged={trace.converged} iters={trace.iterations}"
        f"{nmse_part} residual={fmt17(last.residual)}{dest}"
    )
    return 0


def cmd_equiv(inv: CliInvocation) -> int:
    inst = load_instance(inv.input_path)
    report = audit_equivalence(inst, inv.flags["iters"], tol=inv.flags["tol"])
    verdict = "PASS" if report.passed else "FAIL"
    extra = " (diverged)" if report.diverged else ""
    print(
        f"equiv {verdict}{extra} iters={report.iters} max_dz={fmt17(report.max_dz)} "
        f"max_dmu={fmt17(report.max_dmu)} max_dprec={fmt17(report.max_dprec)}"
    )
    return 0 if report.passed else 5


def _load_sweep_config(path, out_override) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: sweep config must be a JSON object")
    missing = _SWEEP_REQUIRED_KEYS - doc.keys()
    if missing:
        raise ConfigError(f"{path}: missing config keys {sorted(missing)}")
    unknown = doc.keys() - _SWEEP_REQUIRED_KEYS - _SWEEP_OPTIONAL_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    if not isinstance(doc["snr_db_list"], list):
        raise ConfigError(f"{path}: snr_db_list must be a JSON array")
    if not isinstance(doc["algorithms"], list):
        raise ConfigError(f"{path}: algorithms must be a JSON array")
    output = out_override if out_override is not None else doc.get("output")
    if output is None:
        raise ConfigError("sweep needs an output path (--out or config \"output\")")
    return ExperimentConfig(
        m=doc["m"],
        n=doc["n"],
        rho=doc["rho"],
        kappa=doc["kappa"],
        snr_db_list=tuple(doc["snr_db_list"]),
        sample_count=doc["sample_count"],
        max_iter=doc["max_iter"],
        algorithms=tuple(doc["algorithms"]),
        seed=doc["seed"],
        output=output,
    )


def cmd_sweep(inv: CliInvocation) -> int:
    cfg = _load_sweep_config(inv.input_path, inv.output_path)
    rows = run_experiment(cfg)
    print(
        f"sweep wrote {len(rows)} rows ({len(cfg.algorithms)} algorithms x "
        f"{len(cfg.snr_db_list)} SNRs x {cfg.max_iter + 1} iterations) -> {cfg.output}"
    )
    return 0


def cmd_correspond(inv: CliInvocation) -> int:
    passed, total = run_correspondence(inv.flags["seed"], inv.flags["trials"])
    verdict = "PASS" if passed == total else "FAIL"
    print(f"correspond {verdict} {passed}/{total} trials")
    return 0 if passed == total else 5


_DISPATCH = {
    "generate": cmd_generate,
    "solve": cmd_solve,
    "equiv": cmd_equiv,
    "sweep": cmd_sweep,
    "correspond": cmd_correspond,
}


def main(argv=None) -> int:
    try:
        inv = parse_invocation(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return _DISPATCH[inv.subcommand](inv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SchemaError, json.JSONDecodeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except DivergenceError as exc:
        print(f"error: diverged: {exc}", file=sys.stderr)
        return 4
