"""Command-line entry point.

Every subcommand reads an optional JSON config, applies flag overrides, runs,
and writes CSV/JSON files into ``--out-dir``. Each output carries the
normalized config and the tool version so a file can be traced back to the
run that produced it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    ConfigurationMismatchError,
    compare,
    errata_report,
    exhaustive_collab_rates,
    payoff_table,
    reference_check,
)
from .core import GameError
from .engine import RunReport, count_path_occurrences, in_path_flags, run_adver, run_collab, trace_csv
from .interleave import OrderingProbs
from .pfa import (
    FIXTURES,
    MatrixParseError,
    TransitionMatrix,
    build_for_modes,
    fixture_matrix,
    matrix_diff,
    most_likely_paths,
)
from .strategies import DEFAULT_POLL_CAP, AgentMode

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 2, 3
GAMES = ("collaborative", "adversarial")
SEED_ENV = "CPG_SEED"


@dataclass
class ExperimentConfig:
    game: str = "collaborative"
    modes: tuple[str, str] = ("unsocial-optimistic", "unsocial-optimistic")
    probs: tuple[float, float, float] | None = None
    iterations: int | None = None
    ticks: int | None = None
    seed: int = 0
    poll_cap: int = DEFAULT_POLL_CAP
    replications: int = 1
    ties: str = "lowest"
    out_dir: str = "out"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.game not in GAMES:
            raise GameError(f"game must be one of {GAMES}, got {self.game!r}")
        if len(self.modes) != 2:
            raise GameError("modes needs one entry per agent")
        self.modes = tuple(AgentMode.parse(m).name for m in self.modes)
        if self.game == "adversarial":
            if self.probs is None:
                self.probs = OrderingProbs.default().as_tuple()
            self.probs = OrderingProbs(*map(float, self.probs)).as_tuple()
            if self.ticks is None:
                raise GameError("adversarial runs need ticks")
            if self.ticks < 1:
                raise GameError(f"ticks must be >= 1, got {self.ticks}")
            if self.iterations is not None:
                raise GameError("iterations apply to the collaborative game only")
        else:
            if self.probs is not None:
                raise GameError("ordering probabilities apply to the adversarial game only")
            if self.iterations is None:
                raise GameError("collaborative runs need iterations")
            if self.iterations < 1:
                raise GameError(f"iterations must be >= 1, got {self.iterations}")
            if self.ticks is not None:
                raise GameError("ticks apply to the adversarial game only")
        if not 0 <= int(self.seed) < 2**64:
            raise GameError("seed must be a 64-bit unsigned integer")
        if self.replications < 1:
            raise GameError("replications must be >= 1")
        if self.poll_cap < 1:
            raise GameError("poll_cap must be >= 1")
        if self.ties not in ("lowest", "expand"):
            raise GameError("ties must be 'lowest' or 'expand'")

    @property
    def agent_modes(self) -> tuple[AgentMode, AgentMode]:
        return tuple(AgentMode.parse(m) for m in self.modes)

    def echo(self) -> dict:
        """Config as recorded in outputs; the output directory is left out so relocated reruns match."""
        d = asdict(self)
        d.pop("out_dir")
        d["modes"] = list(self.modes)
        if self.probs is not None:
            d["probs"] = list(self.probs)
        return d


# --- config assembly ----------------------------------------------------------


def _parse_modes(text: str) -> tuple[str, str]:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if len(parts) == 1:
        parts = parts * 2
    if len(parts) != 2:
        raise GameError(f"--modes takes one mode or two comma-separated modes, got {text!r}")
    return tuple(AgentMode.parse(p).name for p in parts)


def _parse_probs(text: str) -> tuple[float, float, float]:
    try:
        vals = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise GameError(f"cannot parse --probs {text!r}") from None
    if len(vals) != 3:
        raise GameError("--probs takes three comma-separated numbers")
    return vals


def load_config(args: argparse.Namespace, game: str) -> ExperimentConfig:
    raw: dict = {}
    if getattr(args, "config", None):
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as e:
            raise GameError(f"config {args.config}: {e}") from None
        if not isinstance(raw, dict):
            raise GameError("config must be a JSON object")
    if raw.get("game", game) != game:
        raise GameError(f"config is for the {raw['game']} game, command runs {game}")
    raw["game"] = game
    known = {f for f in ExperimentConfig.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise GameError(f"unknown config keys: {sorted(unknown)}")

    if isinstance(raw.get("modes"), str):
        raw["modes"] = _parse_modes(raw["modes"])
    overrides = {
        "seed": getattr(args, "seed", None),
        "iterations": getattr(args, "iterations", None),
        "ticks": getattr(args, "ticks", None),
        "out_dir": getattr(args, "out_dir", None),
        "replications": getattr(args, "replications", None),
        "poll_cap": getattr(args, "poll_cap", None),
        "ties": getattr(args, "ties", None),
    }
    if getattr(args, "modes", None):
        overrides["modes"] = _parse_modes(args.modes)
    if getattr(args, "probs", None):
        overrides["probs"] = _parse_probs(args.probs)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if "seed" not in raw and os.environ.get(SEED_ENV):
        try:
            raw["seed"] = int(os.environ[SEED_ENV])
        except ValueError:
            raise GameError(f"{SEED_ENV} must be an integer") from None
    if game == "adversarial" and "probs" in raw and raw["probs"] is not None:
        raw["probs"] = tuple(raw["probs"])
    if "modes" in raw:
        raw["modes"] = tuple(raw["modes"])
    return ExperimentConfig(**raw)


def derived_seeds(seed: int, n: int) -> list[int]:
    """Independent per-replication seeds; replication 0 reuses ``seed`` itself."""
    if n == 1:
        return [seed]
    children = np.random.SeedSequence(seed).spawn(n - 1)
    return [seed] + [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


# --- output helpers ---------------------------------------------------------


def provenance(cfg: ExperimentConfig | dict, command: str) -> dict:
    echo = cfg.echo() if isinstance(cfg, ExperimentConfig) else cfg
    return {"tool": "cpgames", "version": __version__, "command": command, "config": echo}


def _header(prov: dict) -> str:
    return json.dumps(prov, sort_keys=True, separators=(",", ":"))


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_json(path: Path, obj: dict, prov: dict) -> None:
    _write(path, json.dumps({"provenance": prov, **obj}, indent=2, sort_keys=True, ensure_ascii=False) + "\n")


def _rep_dir(out: Path, cfg: ExperimentConfig, k: int) -> Path:
    return out if cfg.replications == 1 else out / f"rep-{k:03d}"


# --- commands ---------------------------------------------------------------


def _collab_job(cfg: ExperimentConfig, seed: int) -> dict:
    trace, report = run_collab(cfg.agent_modes, cfg.iterations, seed, cfg.poll_cap)
    oracle = exhaustive_collab_rates(cfg.agent_modes, cfg.poll_cap)
    cmp = compare(report, oracle)
    return {"seed": seed, "trace": trace, "report": report, "oracle": oracle, "comparison": cmp}


def _adver_job(cfg: ExperimentConfig, seed: int) -> dict:
    trace, report = run_adver(cfg.agent_modes, OrderingProbs(*cfg.probs), cfg.ticks, seed)
    return {"seed": seed, "trace": trace, "report": report}


def _fan_out(fn, cfg: ExperimentConfig) -> list[dict]:
    seeds = derived_seeds(cfg.seed, cfg.replications)
    if cfg.replications == 1:
        return [fn(cfg, seeds[0])]
    with ProcessPoolExecutor(max_workers=min(cfg.replications, os.cpu_count() or 1)) as pool:
        futures = [pool.submit(fn, cfg, s) for s in seeds]
        return [f.result() for f in futures]  # replication-index order


def cmd_collab(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    prov = provenance(cfg, "collab")
    merged = []
    for k, res in enumerate(_fan_out(_collab_job, cfg)):
        d = _rep_dir(out, cfg, k)
        rprov = dict(prov, replication=k, seed=res["seed"])
        report, cmp = res["report"], res["comparison"]
        _write(d / "trace.csv", trace_csv(res["trace"], report, header=_header(rprov)))
        _write_json(d / "report.json", {"report": report.to_dict()}, rprov)
        _write_json(d / "comparison.json", {"comparison": cmp.to_dict(), "oracle": res["oracle"].to_dict()}, rprov)
        _write(d / "curves.csv", cmp.curves_csv(header=_header(rprov)))
        merged.append({"replication": k, "seed": res["seed"], "counts": report.counts, "rates": report.rates(),
                       "mse": cmp.mse})
        print(f"rep {k} seed {res['seed']}: " + " ".join(f"{n}={v:.4f}" for n, v in report.rates().items()))
    if cfg.replications > 1:
        _write_json(out / "merged.json", {"replications": merged}, prov)
    return EXIT_OK


def predicted_paths(modes: tuple[AgentMode, AgentMode], probs: tuple[float, float, float], ties: str) -> tuple[list, str]:
    """Most likely paths from the fixture matrix when one matches, else from the built matrix."""
    if modes[0] == modes[1] and modes[0].name in FIXTURES and tuple(probs) == OrderingProbs.default().as_tuple():
        T, source = fixture_matrix(modes[0]), f"fixture:{modes[0].name}"
    else:
        T, source = build_for_modes(modes, OrderingProbs(*probs)), "built"
    return [list(p) for p in most_likely_paths(T, ties)], source


def cmd_adver(cfg: ExperimentConfig) -> int:
    out = Path(cfg.out_dir)
    prov = provenance(cfg, "adver")
    paths, source = predicted_paths(cfg.agent_modes, cfg.probs, cfg.ties)
    merged = []
    for k, res in enumerate(_fan_out(_adver_job, cfg)):
        d = _rep_dir(out, cfg, k)
        rprov = dict(prov, replication=k, seed=res["seed"])
        trace, report = res["trace"], res["report"]
        idx = trace.indices()
        flags = in_path_flags(idx, paths)
        _write(d / "trace.csv", trace_csv(trace, report, {"in_predicted_path": flags}, header=_header(rprov)))
        _write_json(d / "report.json", {"report": report.to_dict()}, rprov)
        occ = [{"path": p, "occurrences": count_path_occurrences(idx, p),
                "per_agent_tick": count_path_occurrences(idx, p) / cfg.ticks} for p in paths]
        _write_json(d / "paths.json", {"source": source, "predicted": occ,
                                       "ticks_in_predicted_path": int(sum(flags))}, rprov)
        merged.append({"replication": k, "seed": res["seed"], "counts": report.counts,
                       "occurrences": [o["occurrences"] for o in occ]})
        print(f"rep {k} seed {res['seed']}: phi={report.counts['phi']} psi={report.counts['psi']} "
              + " ".join(f"{tuple(o['path'])}={o['occurrences']}" for o in occ))
    if cfg.replications > 1:
        _write_json(out / "merged.json", {"replications": merged}, prov)
    return EXIT_OK


def cmd_matrix(args: argparse.Namespace) -> int:
    modes = _parse_modes(args.modes)
    probs = _parse_probs(args.probs) if args.probs else OrderingProbs.default().as_tuple()
    agent_modes = tuple(AgentMode.parse(m) for m in modes)
    op = OrderingProbs(*probs)
    echo = {"modes": list(modes), "probs": list(op.as_tuple())}
    prov = provenance(echo, "matrix")
    out = Path(args.out_dir)
    built = build_for_modes(agent_modes, op)
    _write(out / "matrix_built.csv", f"# {_header(prov)}\n" + built.to_csv())
    _write_json(out / "matrix_built.json", built.to_dict(), prov)
    diff = None
    if modes[0] == modes[1]:
        ref = fixture_matrix(modes[0])
        _write(out / "matrix_fixture.csv", f"# {_header(prov)}\n" + ref.to_csv())
        _write_json(out / "matrix_fixture.json", ref.to_dict(), prov)
        diff = matrix_diff(built, ref)
        _write_json(out / "matrix_diff.json", {"cells": diff, "n_cells": len(diff),
                                               "built_problems": built.check()}, prov)
    print(built.to_csv(decimals=3), end="")
    if diff is not None:
        print(f"{len(diff)} cells differ from the fixture")
    return EXIT_OK


def cmd_paths(args: argparse.Namespace) -> int:
    src = Path(args.matrix)
    text = src.read_text()
    T = TransitionMatrix.from_json(text) if src.suffix.lower() == ".json" else TransitionMatrix.from_csv(text)
    problems = T.check(args.tol)
    if problems:
        raise GameError(f"{src}: " + "; ".join(problems))
    paths = most_likely_paths(T, args.ties)
    prov = provenance({"matrix": src.name, "ties": args.ties, "tol": args.tol}, "paths")
    body = json.dumps({"provenance": prov, **paths.to_dict(T.names)}, indent=2, sort_keys=True, ensure_ascii=False)
    if args.out_dir:
        _write(Path(args.out_dir) / "paths.json", body + "\n")
    print(body)
    return EXIT_OK


def cmd_predict(args: argparse.Namespace) -> int:
    modes = tuple(AgentMode.parse(m) for m in _parse_modes(args.modes))
    poll_cap = args.poll_cap or DEFAULT_POLL_CAP
    r = exhaustive_collab_rates(modes, poll_cap)
    prov = provenance({"modes": [m.name for m in modes], "poll_cap": poll_cap}, "predict")
    body = {"prediction": r.to_dict(), "payoffs": payoff_table([r])}
    if modes[0] == modes[1]:
        body["reference"] = errata_report(r) if args.enumerate else reference_check(r)
    elif args.enumerate:
        body["enumeration"] = r.to_dict(with_runs=True)["runs"]
    text = json.dumps({"provenance": prov, **body}, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.out_dir:
        _write(Path(args.out_dir) / "prediction.json", text)
    print(f"{r.modes[0]}: phi_only={r.phi_only} psi_only={r.psi_only} both={r.both} "
          f"neither={r.neither} length={r.avg_length}")
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    d = json.loads(Path(args.report).read_text())
    report = RunReport.from_dict(d.get("report", d))
    poll_cap = report.config.get("poll_cap", DEFAULT_POLL_CAP)
    modes = tuple(AgentMode.parse(m) for m in report.modes)
    cmp = compare(report, exhaustive_collab_rates(modes, poll_cap))
    prov = provenance({"report": Path(args.report).name, "modes": list(report.modes), "seed": report.seed}, "compare")
    out = Path(args.out_dir)
    _write_json(out / "comparison.json", {"comparison": cmp.to_dict()}, prov)
    _write(out / "curves.csv", cmp.curves_csv(header=_header(prov)))
    print(json.dumps(cmp.mse, sort_keys=True))
    return EXIT_OK


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cpgames", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"cpgames {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def run_opts(sp):
        sp.add_argument("--config", help="JSON config file; flags override its values")
        sp.add_argument("--seed", type=int, help=f"RNG seed (fallback: ${SEED_ENV}, then 0)")
        sp.add_argument("--modes", help="mode for both agents, or two comma-separated modes")
        sp.add_argument("--out-dir", dest="out_dir")
        sp.add_argument("--replications", type=int, help="independent seeded runs, executed in parallel")

    sp = sub.add_parser("collab", help="simulate the collaborative game")
    run_opts(sp)
    sp.add_argument("--iterations", type=int)
    sp.add_argument("--poll-cap", dest="poll_cap", type=int)

    sp = sub.add_parser("adver", help="simulate the adversarial game")
    run_opts(sp)
    sp.add_argument("--ticks", type=int)
    sp.add_argument("--probs", help="p_c0_first,p_c1_first,p_simultaneous")
    sp.add_argument("--ties", choices=("lowest", "expand"))

    sp = sub.add_parser("matrix", help="build the state sequence matrix and diff it against the fixture")
    sp.add_argument("--modes", default="unsocial-optimistic")
    sp.add_argument("--probs")
    sp.add_argument("--out-dir", dest="out_dir", default="out")

    sp = sub.add_parser("paths", help="most likely cycles of a matrix file (CSV or JSON)")
    sp.add_argument("matrix")
    sp.add_argument("--ties", choices=("lowest", "expand"), default="lowest")
    sp.add_argument("--tol", type=float, default=0.002, help="row-sum tolerance")
    sp.add_argument("--out-dir", dest="out_dir")

    sp = sub.add_parser("predict", help="exact collaborative outcome rates")
    sp.add_argument("--modes", default="unsocial-optimistic")
    sp.add_argument("--poll-cap", dest="poll_cap", type=int)
    sp.add_argument("--enumerate", action="store_true", help="attach every ordering with its probability")
    sp.add_argument("--out-dir", dest="out_dir")

    sp = sub.add_parser("compare", help="compare a collaborative report.json with the exact prediction")
    sp.add_argument("report")
    sp.add_argument("--out-dir", dest="out_dir", default="out")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_VALIDATION
    try:
        if args.command == "collab":
            return cmd_collab(load_config(args, "collaborative"))
        if args.command == "adver":
            return cmd_adver(load_config(args, "adversarial"))
        if args.command == "matrix":
            return cmd_matrix(args)
        if args.command == "paths":
            return cmd_paths(args)
        if args.command == "predict":
            return cmd_predict(args)
        return cmd_compare(args)
    except (GameError, MatrixParseError, ConfigurationMismatchError, TypeError) as e:
        print(f"cpgames: error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, RuntimeError, json.JSONDecodeError) as e:
        print(f"cpgames: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
