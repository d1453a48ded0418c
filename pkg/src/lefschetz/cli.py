"""Command line front end: ``lefschetz flow|family|signature``.

Exit codes: 0 success, 1 error, 2 flow stopped at the time cap,
3 word is not an identity factorization.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path

import numpy as np

from .fibered import (
    BaseSample,
    FamilyError,
    loop_continuity,
    make_family,
    run_family,
    uniform_envelope,
    write_family,
)
from .flow import (
    DegenerateStateError,
    FlowConfig,
    InsufficientSamplesError,
    PoissonSolveError,
    TargetCurvature,
    run_flow,
)
from .mcg import WordFormatError, load_word
from .mesh import InvalidStateError, MeshValidationError, validate
from .meshes import MeshFormatError, load_trisurf
from .meyer import OpenFibrationError, fibration_signature

EXIT_OK, EXIT_ERROR, EXIT_TIME_CAP, EXIT_OPEN = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


FLOW_KEYS = {"dt_init": float, "dt_max": float, "tol": float, "t_max": float,
             "step_rule": str, "monitor_every": int}
FLOW_INIT_KEYS = {"seed": int, "amplitude": float}
FAMILY_KEYS = {"base": str, "size": int, "amplitude": float, "class_amplitude": float,
               "seed": int, "fingerprint_m": int}
DEFAULTS = {
    "flow": {"seed": 0, "amplitude": 0.3},
    "family": {"base": "loop", "size": 32, "amplitude": 0.2, "class_amplitude": 0.0,
               "seed": 0, "fingerprint_m": 12},
}


def _convert(section: str, key: str, raw: str, kind):
    try:
        if kind is int:
            return int(raw, 10)
        return kind(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r}: expected {kind.__name__}") from None


def load_config(path: str | None) -> dict[str, dict]:
    """Read the ``key = value`` config; unknown sections or keys are errors."""
    cfg = {"flow": dict(DEFAULTS["flow"]), "family": dict(DEFAULTS["family"]), "flowcfg": {}}
    if path is None:
        return cfg
    if not Path(path).is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    for section in parser.sections():
        if section not in ("flow", "family"):
            raise ConfigError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if section == "flow" and key in FLOW_KEYS:
                cfg["flowcfg"][key] = _convert(section, key, raw, FLOW_KEYS[key])
            elif section == "flow" and key in FLOW_INIT_KEYS:
                cfg["flow"][key] = _convert(section, key, raw, FLOW_INIT_KEYS[key])
            elif section == "family" and key in FAMILY_KEYS:
                cfg["family"][key] = _convert(section, key, raw, FAMILY_KEYS[key])
            else:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
    return cfg


def _flow_config(cfg: dict) -> FlowConfig:
    try:
        return FlowConfig(**cfg["flowcfg"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _load_mesh(path: str):
    surface = load_trisurf(path)
    report = validate(surface)
    if not report.passed:
        raise MeshValidationError(report)
    return surface


def _err(msg: str) -> None:
    print(f"lefschetz: {msg}", file=sys.stderr)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _num(x: float):
    return None if x is None or not np.isfinite(x) else float(x)


def cmd_flow(args) -> int:
    cfg = load_config(args.config)
    fcfg = _flow_config(cfg)
    surface = _load_mesh(args.mesh)
    rng = np.random.default_rng(cfg["flow"]["seed"])
    amp = cfg["flow"]["amplitude"]
    state0 = surface.state(rng.uniform(-amp, amp, surface.n_vertices))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    state, trace = run_flow(state0, TargetCurvature.uniform(surface), fcfg)
    with open(out / "trace.csv", "w", newline="") as fh:
        trace.to_csv(fh)
    summary = {
        "converged": trace.terminated == "converged",
        "terminated": trace.terminated,
        "t_final": float(state.time),
        "fitted_rate": _num(trace.fit.rate) if trace.fit else None,
        "r2": _num(trace.fit.r2) if trace.fit else None,
        "steps": trace.steps,
    }
    text = _dump(summary)
    (out / "summary.json").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK if trace.terminated == "converged" else EXIT_TIME_CAP


def cmd_family(args) -> int:
    cfg = load_config(args.config)
    fcfg = _flow_config(cfg)
    fam = cfg["family"]
    surface = _load_mesh(args.mesh)
    kind = fam["base"]
    if kind == "loop":
        base = BaseSample.loop(fam["size"])
    elif kind == "disk-grid":
        base = BaseSample.disk_grid(fam["size"])
    elif kind == "sphere-mesh":
        base = BaseSample.sphere_mesh()
    else:
        raise ConfigError(f"unknown base kind {kind!r}")
    family = make_family(surface, base, fam["amplitude"], fam["seed"],
                         class_amplitude=fam["class_amplitude"])
    family = run_family(family, fcfg)
    envelope = uniform_envelope(family)
    continuity = loop_continuity(family, fam["fingerprint_m"]) if kind == "loop" else None
    write_family(family, args.out, m=fam["fingerprint_m"], envelope=envelope,
                 continuity=continuity)
    ok = envelope.rate < 0 and envelope.bound_ok and (continuity is None or continuity[1])
    sys.stdout.write(_dump({
        "fibers": base.n_points,
        "envelope": {"C0": envelope.C0, "rate": envelope.rate, "r2": envelope.r2,
                     "bound_ok": envelope.bound_ok},
        "continuity": None if continuity is None else
        {"max_gap": continuity[0], "closed": continuity[1]},
    }))
    if not ok:
        _err("envelope fit or loop closure check failed")
    return EXIT_OK if ok else EXIT_ERROR


def cmd_signature(args) -> int:
    word = load_word(args.word)
    try:
        report = fibration_signature(word.space, word)
    except OpenFibrationError as exc:
        _err(str(exc))
        return EXIT_OPEN
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(report.to_json())
    print(report.summary())
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    try:
        ver = version("artifact")
    except PackageNotFoundError:
        ver = "0+unknown"
    p = argparse.ArgumentParser(prog="lefschetz",
                                description="Discrete fibered Ricci flow and Lefschetz fibration signatures.")
    p.add_argument("--version", action="version", version=f"%(prog)s {ver}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("flow", help="run the normalized flow on one mesh")
    f.add_argument("mesh", help="trisurf file or bundled mesh name (sphere, torus, genus2, genus3)")
    f.add_argument("--config", help="key = value config file")
    f.add_argument("--out", default="out", help="output directory")
    f.set_defaults(func=cmd_flow)

    fa = sub.add_parser("family", help="run the fibered flow over a sampled base")
    fa.add_argument("mesh")
    fa.add_argument("--config")
    fa.add_argument("--out", default="out")
    fa.set_defaults(func=cmd_family)

    s = sub.add_parser("signature", help="signature of a monodromy word file")
    s.add_argument("word")
    s.add_argument("--out", default="out")
    s.set_defaults(func=cmd_signature)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, MeshFormatError, WordFormatError, MeshValidationError,
            InvalidStateError, DegenerateStateError, PoissonSolveError, FamilyError,
            InsufficientSamplesError, OSError, ValueError, TypeError) as exc:
        _err(str(exc))
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
