"""Command-line front end.

    bpagame simulate --r 0.3 --profile homophily --n 200 --seed 1 --dot out.dot
    bpagame urn      --r 0.3 --rho-r 0.7 --rho-b 0.4 --horizon 100000 --trials 100
    bpagame solve    --r 0.3 --rho-r 0.7 --rho-b 0.4
    bpagame game     --r 0.3 --gamma 0.7 --grid 20
    bpagame validate --config run.csv

Parameters come from an optional INI file (``--config``, section
``[bpagame]``) overridden by flags.  Every output file starts with the run
manifest as ``# key = value`` lines, which is itself a valid config.
"""
from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import __version__, export, graph
from .analysis import SolverInconsistency, fixed_point, steady_cut_fraction
from .ensemble import default_jobs, mean_and_se, urn_ensemble
from .game import GameConfig, find_equilibria, response_utilities
from .model import Color, DomainError, MixingMatrix, ModelParams, Profile
from .urn import urn_run

OUTPUT_DIR_ENV = "BPAGAME_OUTPUT_DIR"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SIMULATION = 3
EXIT_SOLVER = 4

SUBCOMMANDS = ("simulate", "urn", "solve", "game", "validate")

# Parameters that each subcommand reads, in manifest order.
_PARAMS = {
    "simulate": ("r", "rho_r", "rho_b", "n", "mode", "cap", "seed"),
    "urn": ("r", "rho_r", "rho_b", "horizon", "trials", "seed"),
    "solve": ("r", "rho_r", "rho_b"),
    "game": ("r", "gamma", "grid", "epsilon", "tolerance"),
}
_REQUIRED = {"r", "rho_r", "rho_b", "gamma"}
_DEFAULTS = {
    "n": 1000,
    "mode": "exact",
    "cap": 10**6,
    "seed": 0,
    "horizon": 1000,
    "trials": 1,
    "grid": 20,
    "epsilon": None,
    "tolerance": 1e-12,
}
# Informational manifest keys accepted (and otherwise ignored) in config files.
_INFO_KEYS = ("subcommand", "rng", "version")
_ALL_KEYS = sorted({k for ks in _PARAMS.values() for k in ks} | {"profile"})


class ConfigError(Exception):
    """One or more invalid parameters; ``messages`` holds one line per problem."""

    def __init__(self, messages: list[str]):
        super().__init__("; ".join(messages))
        self.messages = messages


@dataclass
class RunDescription:
    subcommand: str
    params: dict
    outputs: dict = field(default_factory=dict)
    jobs: int = 1
    target: str | None = None  # validate only: the subcommand being checked

    def manifest(self) -> dict:
        return {"subcommand": self.subcommand, **self.params,
                "rng": graph.RNG_ID, "version": __version__}

    @property
    def model_params(self) -> ModelParams:
        p = self.params
        return ModelParams(p["r"], MixingMatrix(p["rho_r"], p["rho_b"]), p.get("n", 0))


# ---------------------------------------------------------------------------
# parsing and validation


def _as_int(text) -> int:
    if isinstance(text, int):
        return text
    value = float(text)
    if not value.is_integer():
        raise ValueError(text)
    return int(value)


def _as_float(text) -> float:
    return float(text)


def _as_optional_float(text):
    if text is None or str(text).strip().lower() in ("", "none"):
        return None
    return float(text)


def _as_mode(text) -> str:
    key = str(text).strip().lower()
    if key not in ("exact", "rejection"):
        raise ValueError(text)
    return key


_CONVERT: dict[str, Callable] = {
    "r": _as_float, "rho_r": _as_float, "rho_b": _as_float, "gamma": _as_float,
    "tolerance": _as_float, "epsilon": _as_optional_float,
    "n": _as_int, "cap": _as_int, "seed": _as_int, "horizon": _as_int,
    "trials": _as_int, "grid": _as_int, "mode": _as_mode,
}

# (key, predicate, description of the allowed range)
_CHECKS = [
    ("r", lambda v: 0.0 < v < 1.0, "must lie in (0, 1)"),
    ("rho_r", lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
    ("rho_b", lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
    ("gamma", lambda v: 0.0 <= v <= 1.0, "must lie in [0, 1]"),
    ("n", lambda v: v >= 0, "must be >= 0"),
    ("horizon", lambda v: v >= 0, "must be >= 0"),
    ("trials", lambda v: v >= 1, "must be >= 1"),
    ("seed", lambda v: v >= 0, "must be >= 0"),
    ("cap", lambda v: v >= 1, "must be >= 1"),
    ("grid", lambda v: v >= 2, "must be >= 2"),
    ("epsilon", lambda v: v is None or 0.0 < v <= 1.0, "must lie in (0, 1]"),
    ("tolerance", lambda v: v >= 0.0, "must be >= 0"),
]


def _layer(raw: dict, origin: str, errors: list[str]) -> dict:
    """Convert one source of raw values, expanding ``profile`` into rho values."""
    out = {}
    for key, text in raw.items():
        if key in ("profile", *_INFO_KEYS) or text is None:
            continue
        try:
            out[key] = _CONVERT[key](text)
        except (TypeError, ValueError):
            errors.append(f"{key}: invalid value {text!r} ({origin})")
            out[key] = None
    if raw.get("profile") is not None:
        try:
            pi = Profile.parse(str(raw["profile"])).matrix
        except DomainError as exc:
            errors.append(f"profile: {exc} ({origin})")
        else:
            for key, value in (("rho_r", pi.rho_r), ("rho_b", pi.rho_b)):
                if key in out and out[key] != value:
                    errors.append(f"{key}: conflicts with profile {raw['profile']!r} ({origin})")
                out[key] = value
    return out


def read_config_file(path: str | os.PathLike) -> dict:
    """Raw key/value pairs of the ``[bpagame]`` section.

    Accepts a plain INI file or any output file carrying a manifest header.
    """
    text = Path(path).read_text()
    lines = text.splitlines(keepends=True)
    header = export.read_manifest_lines(lines)
    if header is not None:
        text = header
    parser = configparser.ConfigParser(interpolation=None)
    parser.read_string(text, source=str(path))
    if not parser.has_section(export.MANIFEST_SECTION):
        raise ConfigError([f"config: no [{export.MANIFEST_SECTION}] section in {path}"])
    return dict(parser.items(export.MANIFEST_SECTION))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bpagame", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, argument_default=None)
        p.add_argument("--config", help="INI file with a [bpagame] section, or a previous output")
        keys = _ALL_KEYS if name == "validate" else (*_PARAMS[name], "profile")
        for key in keys:
            if key in ("rho_r", "rho_b", "profile") and name == "game":
                continue
            p.add_argument("--" + key.replace("_", "-"), dest=key)
        if name in ("simulate", "urn", "game"):
            p.add_argument("--out-dir", help=f"default output directory (else ${OUTPUT_DIR_ENV} or .)")
        if name in ("simulate", "urn"):
            p.add_argument("--csv", help="trajectory CSV (urn with --trials > 1: per-trial finals)")
        if name == "simulate":
            p.add_argument("--edges", help="edge-list output")
            p.add_argument("--dot", help="DOT output")
        if name == "urn":
            p.add_argument("--jobs", type=int, default=None,
                           help="worker processes (default: all cores)")
        if name in ("solve", "game"):
            p.add_argument("--json", help="also write the JSON record to this file")
        if name == "game":
            p.add_argument("--br-csv", help="best-response utility table")
    return parser


def parse_config(argv: list[str]) -> RunDescription:
    """Turn command-line arguments into a validated ``RunDescription``.

    Raises ``ConfigError`` listing every violated constraint.
    """
    ns = _build_parser().parse_args(argv)
    errors: list[str] = []
    file_raw: dict = {}
    if ns.config is not None:
        try:
            file_raw = read_config_file(ns.config)
        except ConfigError as exc:
            errors.extend(exc.messages)
        except (OSError, configparser.Error) as exc:
            errors.append(f"config: cannot read {ns.config}: {exc}".replace("\n", " "))
    for key in file_raw:
        if key not in _ALL_KEYS and key not in _INFO_KEYS:
            errors.append(f"{key}: unknown configuration key")
    if file_raw.get("rng", graph.RNG_ID) != graph.RNG_ID:
        errors.append(f"rng: unsupported generator {file_raw['rng']!r}")

    subcommand = ns.subcommand
    if subcommand == "validate":
        subcommand = file_raw.get("subcommand", "validate")
        if subcommand not in SUBCOMMANDS:
            errors.append(f"subcommand: unknown value {subcommand!r}")
            subcommand = "validate"

    file_raw = {k: v for k, v in file_raw.items() if k in _ALL_KEYS}
    flag_raw = {k: getattr(ns, k, None) for k in _ALL_KEYS}
    merged = {**_layer(file_raw, "config", errors), **_layer(flag_raw, "flag", errors)}

    if subcommand == "validate":
        wanted = tuple(k for k in _ALL_KEYS if k in merged)
    else:
        wanted = _PARAMS[subcommand]
    params = {}
    for key in wanted:
        if key in merged:
            params[key] = merged[key]  # None here means already reported invalid
        elif key in _REQUIRED:
            errors.append(f"{key}: missing required parameter")
        else:
            params[key] = _DEFAULTS[key]
    for key, ok, rule in _CHECKS:
        if key in params and params[key] is not None and not ok(params[key]):
            errors.append(f"{key}: {rule}, got {params[key]!r}")

    jobs = getattr(ns, "jobs", None)
    if jobs is not None and jobs < 1:
        errors.append(f"jobs: must be >= 1, got {jobs}")
    if errors:
        raise ConfigError(errors)

    outputs = {k: getattr(ns, k) for k in ("csv", "edges", "dot", "json", "br_csv", "out_dir")
               if getattr(ns, k, None) is not None}
    if ns.subcommand == "validate":
        return RunDescription("validate", params, outputs, 1, target=subcommand)
    return RunDescription(subcommand, params, outputs, jobs or default_jobs())


# ---------------------------------------------------------------------------
# subcommands


def _output_dir(desc: RunDescription) -> Path:
    return Path(desc.outputs.get("out_dir") or os.environ.get(OUTPUT_DIR_ENV) or ".")


def _output_path(desc: RunDescription, key: str, default_name: str) -> Path:
    if key in desc.outputs:
        return Path(desc.outputs[key])
    return _output_dir(desc) / default_name


def _open_for_write(path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    return path.open("w", newline="\n")


def _run_simulate(desc: RunDescription) -> dict:
    p = desc.params
    params = desc.model_params
    mode = graph.parse_mode(p["mode"], p["cap"])
    traj = graph.run(params, p["seed"], mode)
    manifest = desc.manifest()
    csv_path = _output_path(desc, "csv", "simulate.csv")
    with _open_for_write(csv_path) as fh:
        export.write_series_csv(fh, manifest, ("alpha", "cut_fraction"),
                                (traj.alpha_series, traj.cut_series))
    written = [str(csv_path)]
    state = traj.final_state
    if "edges" in desc.outputs:
        with _open_for_write(Path(desc.outputs["edges"])) as fh:
            export.write_edge_list(fh, state, manifest)
        written.append(desc.outputs["edges"])
    if "dot" in desc.outputs:
        with _open_for_write(Path(desc.outputs["dot"])) as fh:
            export.write_dot(fh, state, manifest)
        written.append(desc.outputs["dot"])
    return {
        "alpha": state.alpha,
        "cut_count": state.cut_count,
        "cut_fraction": state.cut_fraction,
        "n_vertices": state.n_vertices,
        "n_edges": state.n_edges,
        "outputs": written,
    }


def _run_urn(desc: RunDescription) -> dict:
    p = desc.params
    params = desc.model_params
    manifest = desc.manifest()
    csv_path = _output_path(desc, "csv", "urn.csv")
    fp = fixed_point(params.r, params.pi)
    summary = {"analytic_alpha": fp.alpha,
               "analytic_cut_fraction": steady_cut_fraction(params.r, params.pi, fp.alpha)}
    if p["trials"] == 1:
        traj = urn_run(params, p["seed"], p["horizon"])
        with _open_for_write(csv_path) as fh:
            export.write_series_csv(fh, manifest, ("alpha", "cut_fraction"),
                                    (traj.alpha_series, traj.cut_series))
        summary.update(alpha=traj.final_state.alpha, cut_fraction=traj.final_state.cut_fraction)
    else:
        seeds = [p["seed"] + i for i in range(p["trials"])]
        alpha, cut = urn_ensemble(params, seeds, p["horizon"], jobs=desc.jobs)
        with _open_for_write(csv_path) as fh:
            export.write_rows_csv(fh, manifest, ("trial", "seed", "alpha", "cut_fraction"),
                                  [(i, s, float(a), float(c))
                                   for i, (s, a, c) in enumerate(zip(seeds, alpha, cut))])
        ma, sa = mean_and_se(alpha)
        mc, sc = mean_and_se(cut)
        summary.update(mean_alpha=ma, se_alpha=sa, mean_cut_fraction=mc, se_cut_fraction=sc)
    summary["outputs"] = [str(csv_path)]
    return summary


def solve_record(r: float, rho_r: float, rho_b: float) -> dict:
    pi = MixingMatrix(rho_r, rho_b)
    fp = fixed_point(r, pi)
    return {
        "r": r,
        "rho_r": rho_r,
        "rho_b": rho_b,
        "alpha": fp.alpha,
        "residual": fp.residual,
        "certified_unique": fp.certified_unique,
        "cut_fraction": steady_cut_fraction(r, pi, fp.alpha),
    }


def _write_json(desc: RunDescription, record: dict) -> None:
    if "json" in desc.outputs:
        with _open_for_write(Path(desc.outputs["json"])) as fh:
            json.dump({"manifest": desc.manifest(), "result": export.json_safe(record)},
                      fh, indent=2)
            fh.write("\n")


def _run_solve(desc: RunDescription) -> dict:
    p = desc.params
    record = solve_record(p["r"], p["rho_r"], p["rho_b"])
    _write_json(desc, record)
    return record


def _game_config(desc: RunDescription) -> GameConfig:
    p = desc.params
    return GameConfig(p["r"], p["gamma"], p["grid"], p["epsilon"], p["tolerance"])


def _run_game(desc: RunDescription) -> dict:
    config = _game_config(desc)
    report = find_equilibria(config)
    record = report.to_dict()
    _write_json(desc, record)
    if "br_csv" in desc.outputs:
        grid = config.grid
        rows = []
        for responder in (Color.RED, Color.BLUE):
            for opp in grid:
                utils = response_utilities(responder, float(opp), config)
                rows.append((responder.name.lower(), float(opp), *(float(u) for u in utils)))
        columns = ("responder", "opponent_rho", *(f"u_{float(s)!r}" for s in grid))
        with _open_for_write(Path(desc.outputs["br_csv"])) as fh:
            export.write_rows_csv(fh, desc.manifest(), columns, rows)
    return record


def _run_validate(desc: RunDescription) -> dict:
    return {"valid": True, "subcommand": desc.target, **desc.params}


_RUNNERS = {
    "simulate": _run_simulate,
    "urn": _run_urn,
    "solve": _run_solve,
    "game": _run_game,
    "validate": _run_validate,
}


def run_subcommand(desc: RunDescription, stdout=None, stderr=None) -> int:
    """Execute a validated description; returns the process exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    started = time.perf_counter()
    try:
        record = _RUNNERS[desc.subcommand](desc)
    except graph.RejectionCapExceeded as exc:
        print(f"bpagame: simulation aborted: {exc}", file=stderr)
        return EXIT_SIMULATION
    except SolverInconsistency as exc:
        print(f"bpagame: solver inconsistency: {exc}", file=stderr)
        return EXIT_SOLVER
    except DomainError as exc:
        print(f"bpagame: error: {exc}", file=stderr)
        return EXIT_VALIDATION
    elapsed = time.perf_counter() - started
    if desc.subcommand in ("simulate", "urn"):
        record = {**desc.manifest(), **record, "duration_s": elapsed}
    json.dump(export.json_safe(record), stdout)
    stdout.write("\n")
    if desc.subcommand in ("solve", "game"):
        print(f"bpagame: {desc.subcommand} finished in {elapsed:.3f} s", file=stderr)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        desc = parse_config(argv)
    except ConfigError as exc:
        for message in exc.messages:
            print(f"bpagame: error: {message}", file=sys.stderr)
        return EXIT_VALIDATION
    except DomainError as exc:
        print(f"bpagame: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run_subcommand(desc)


if __name__ == "__main__":
    sys.exit(main())
