"""Command-line harness: ``ncrecur run | validate-only | list-scenarios``.

Exit codes: 0 success, 1 an asserted invariant failed (or the net ran out
before the averages converged), 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, ExperimentConfig, build_config, read_file
from .dynamics import validate_system
from .ergodic import (
    averaging_operator,
    convergence_profile,
    ergodic_bound_report,
    fixed_projection,
    is_ergodic,
    khintchine_recurrence,
)
from .exceptions import InconsistentDynamicsError, NetExhaustedError, PreconditionError
from .gns import gns_build, gns_lift, iota, u_at
from .multirec import multiple_recurrence_search
from .scenarios import get_scenario, list_scenarios
from .semigroup import compose, word_ball

EXIT_OK, EXIT_INVARIANT, EXIT_USAGE = 0, 1, 2
RNG_NAME = "numpy.random.Generator(PCG64)"


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


@dataclass
class ResultBundle:
    """Files of one run, keyed by role, plus the run's failure list."""

    out: Path
    files: dict[str, str] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)

    def write(self, role: str, name: str, text: str) -> None:
        (self.out / name).write_text(text, encoding="utf-8")
        self.files[role] = name

    def write_json(self, role: str, name: str, obj) -> None:
        self.write(role, name, dumps(obj))

    @property
    def exit_code(self) -> int:
        return EXIT_INVARIANT if self.failures else EXIT_OK


def load_config(args) -> ExperimentConfig:
    sections = read_file(args.config) if args.config else {}
    overrides: dict[str, dict[str, str]] = {"experiment": {}}
    if args.scenario:
        overrides["experiment"]["scenario"] = args.scenario
    if args.seed is not None:
        overrides["experiment"]["seed"] = str(args.seed)
    if args.out:
        overrides["experiment"]["output"] = args.out
    name = overrides["experiment"].get("scenario") or sections.get("experiment", {}).get("scenario")
    if not name:
        raise ConfigError("no scenario given; use --scenario or [experiment] scenario in --config")
    scenario = get_scenario(name)
    return build_config(sections, scenario.defaults, overrides)


def prepare_output(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.output or f"ncrecur-out/{cfg.scenario}")
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-test"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _u_semigroup_residual(rep, model) -> float:
    ball = word_ball(model, 2)
    worst = 0.0
    for g in ball:
        for h in ball:
            diff = u_at(rep, model, g) @ u_at(rep, model, h) - u_at(rep, model, compose(model, g, h))
            worst = max(worst, float(np.max(np.abs(diff))))
    return worst


def _validate(cfg, setup, bundle):
    report = validate_system(
        setup.system, tol=cfg.validation_tol, samples=cfg.samples, seed=cfg.seed
    )
    bundle.write_json("validation", "validation.json", report.as_dict())
    for name, check in report.checks.items():
        if not check.passed:
            bundle.failures.append(f"validation: {name} residual {check.residual:.3e}")
    return report


def _pipeline(cfg, setup, validation, bundle) -> None:
    system = setup.system.with_validation(validation)
    model = system.model
    rep = gns_lift(gns_build(system.descriptor, system.state, cfg.rank_tol), system)
    proj = fixed_projection(rep)
    ergodic = is_ergodic(rep, projection=proj)
    n_max, lam_max = setup.net.schedule[-1], setup.net.sets[-1]
    p_avg = averaging_operator(rep, model, lam_max)
    gns = rep.diagnostics()
    gns.update(
        u_semigroup_residual=_u_semigroup_residual(rep, model),
        fixed_rank=proj.rank,
        ergodicity=ergodic.as_dict(),
        projection_vs_average={
            "N": n_max,
            "lambda_size": len(lam_max),
            "norm": float(np.linalg.norm(proj.matrix - p_avg, 2)),
        },
    )
    bundle.write_json("gns", "gns.json", gns)

    series = convergence_profile(rep, model, iota(rep, setup.b), setup.net, proj)
    bundle.write("convergence", "convergence.csv", series.to_csv())

    report = khintchine_recurrence(
        system, rep, setup.a, setup.b, cfg.epsilon, setup.net, setup.h_set, setup.side, proj
    )
    bound = None
    if ergodic:
        bound = ergodic_bound_report(
            system, rep, setup.a, setup.b, cfg.epsilon, setup.net, setup.h_set, setup.side, proj
        )
    all_pass = report.all_pass and (bound is None or bound.all_pass)
    bundle.write_json(
        "recurrence",
        "recurrence.json",
        {
            "khintchine": report.as_dict(),
            "ergodic_bound": None if bound is None else bound.as_dict(),
            "all_pass": all_pass,
        },
    )
    if not all_pass:
        bundle.failures.append("recurrence: not every window passed")

    if setup.exponents:
        multi = multiple_recurrence_search(
            system, setup.a, setup.exponents, cfg.epsilon, setup.net, setup.h_set,
            cfg.rank_tol, rep=rep,
        )
        bundle.write_json("multirec", "multirec.json", multi.as_dict())
        if not multi.all_pass:
            bundle.failures.append("multirec: not every window passed")


def execute(cfg: ExperimentConfig, command: str = "run") -> ResultBundle:
    """Run one scenario and write its bundle. Raises ConfigError for bad input."""
    start = time.perf_counter()
    scenario = get_scenario(cfg.scenario)
    out = prepare_output(cfg)
    try:
        setup = scenario.build(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bundle = ResultBundle(out)
    validation = _validate(cfg, setup, bundle)
    if command == "run" and validation.passed:
        try:
            _pipeline(cfg, setup, validation, bundle)
        except (NetExhaustedError, InconsistentDynamicsError, PreconditionError) as exc:
            bundle.failures.append(f"{type(exc).__name__}: {exc}")
    manifest = {
        "tool": "ncrecur",
        "versions": {
            "ncrecur": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "command": command,
        "config": cfg.as_dict(),
        "rng": {"generator": RNG_NAME, "seed": cfg.seed},
        "files": dict(bundle.files),
        "status": "invariant-failure" if bundle.failures else "ok",
        "failures": list(bundle.failures),
        "exit_code": bundle.exit_code,
        "wall_time": time.perf_counter() - start,
    }
    bundle.files["manifest"] = "manifest.json"
    bundle.write_json("manifest", "manifest.json", manifest)
    return bundle


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ncrecur",
        description="Ergodic averages and recurrence for finite-dimensional *-dynamical systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for verb, help_text in (
        ("run", "validate, build the GNS data, and write the full result bundle"),
        ("validate-only", "check the dynamical-system axioms and write validation.json"),
    ):
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("--config", metavar="PATH", help="INI experiment file")
        p.add_argument("--scenario", help="scenario name (overrides the config file)")
        p.add_argument("--out", metavar="DIR", help="output directory")
        p.add_argument("--seed", type=int, help="random seed (overrides the config file)")
    sub.add_parser("list-scenarios", help="print the registered scenarios")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK

    if args.command == "list-scenarios":
        rows = list_scenarios()
        width = max(len(name) for name, _ in rows)
        for name, desc in rows:
            print(f"{name:<{width}}  {desc}")
        return EXIT_OK

    try:
        cfg = load_config(args)
        bundle = execute(cfg, args.command)
    except ConfigError as exc:
        print(f"ncrecur: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for line in bundle.failures:
        print(f"ncrecur: FAIL {line}", file=sys.stderr)
    print(f"wrote {len(bundle.files)} files to {bundle.out}")
    return bundle.exit_code


if __name__ == "__main__":
    sys.exit(main())
