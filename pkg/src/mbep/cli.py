"""Command-line front end.

    mbep <spectrum|jordan|perturb|evolve|qgt|verify> --config FILE
         [--preset NAME --param k=v ...] [--out DIR] [--jobs N]

The config file is a model document (see ``data/model.schema.json``) with
an optional ``command`` block holding per-command options keyed by command
name.  Everything is validated before any computation, and output files are
only written once the command has finished.  Exit codes: 0 ok, 2 config
error, 3 numerical failure, 4 failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .exact import GaussianRational, as_rational
from .jordan import DEFAULT_CLUSTER_TOL, detect_structure, jordan_basis, predict_kron_sum_blocks
from .linalg import DEFAULT_RANK_TOL, NumericalError
from .model import ModelError, build_parts, model_from_dict, preset

COMMANDS = ("spectrum", "jordan", "perturb", "evolve", "qgt", "verify")
EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 2, 3, 4

COMMAND_SCHEMA = json.loads(resources.files("mbep").joinpath("data/command.schema.json").read_text())


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------
# formatting
# ----------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, GaussianRational):
        return [str(x.re), str(x.im)]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else repr(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


def dumps(doc) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_jsonable(doc), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _sorted_eigenvalues(m) -> list:
    w = np.linalg.eigvals(np.asarray(m, dtype=complex))
    order = np.lexsort((np.round(w.imag, 12), np.round(w.real, 12)))
    return [complex(x) for x in w[order]]


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------


def _parse_param(text: str):
    if "=" not in text:
        raise ConfigError(f"--param expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def load_config(args) -> tuple[dict, dict]:
    """Return ``(model document, command options)`` after validation."""
    import jsonschema

    doc: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
    params = dict(_parse_param(p) for p in args.param or [])
    if args.preset:
        doc = {k: v for k, v in doc.items() if k == "command"}
        doc["preset"] = {"name": args.preset, "params": params}
    elif params:
        if "preset" not in doc:
            raise ConfigError("--param needs a preset (in the config or via --preset)")
        doc["preset"] = dict(doc["preset"])
        doc["preset"]["params"] = {**doc["preset"].get("params", {}), **params}

    block = doc.get("command", {})
    if not isinstance(block, dict):
        raise ConfigError("command block must be an object")
    unknown = set(block) - set(COMMANDS)
    if unknown:
        raise ConfigError(f"unknown command sections {sorted(unknown)}")
    options = dict(block.get(args.command, {}))
    try:
        jsonschema.validate(options, {**COMMAND_SCHEMA, **COMMAND_SCHEMA["$defs"][args.command]})
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid {args.command} options: {exc.message}") from None
    if args.jobs is not None:
        options["jobs"] = args.jobs
    if args.command != "verify" and "n_levels" not in doc and "preset" not in doc:
        raise ConfigError("no model: give --config with a model or --preset")
    return doc, options


def _grid(spec: dict | None, start: float, stop: float, num: int) -> np.ndarray:
    spec = spec or {}
    a, b, n = spec.get("start", start), spec.get("stop", stop), spec.get("num", num)
    if b <= a:
        raise ConfigError(f"grid stop {b} must exceed start {a}")
    return np.linspace(a, b, n)


def _preset_info(doc: dict):
    if "preset" not in doc:
        return None, {}
    return doc["preset"]["name"], dict(doc["preset"].get("params", {}))


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------


def cmd_spectrum(doc, options) -> dict:
    parts = build_parts(model_from_dict(doc))
    summary = {
        name: _sorted_eigenvalues(getattr(parts, name))
        for name in ("hamiltonian", "h_eff", "liouvillian_eff", "lindbladian_eff", "full_lindbladian")
    }
    return {"spectrum.json": dumps(summary)}


def cmd_jordan(doc, options) -> dict:
    parts = build_parts(model_from_dict(doc))
    which = options.get("matrix", "liouvillian_eff")
    ctol = options.get("cluster_tol", DEFAULT_CLUSTER_TOL)
    rtol = options.get("rank_tol", DEFAULT_RANK_TOL)
    found = detect_structure(getattr(parts, which), ctol, rtol)
    out = {"matrix": which, "structures": [s.to_dict() for s in found], "predicted": None, "agree": None}
    if which == "liouvillian_eff":
        h_blocks = [(size, s.eigenvalue) for s in detect_structure(parts.h_eff, ctol, rtol) for size in s.segre]
        predicted = predict_kron_sum_blocks(h_blocks, h_blocks, hamiltonian=True, cluster_tol=max(ctol, 1e-6))
        out["predicted"] = [s.to_dict() for s in predicted]
        out["agree"] = _same_structures(found, predicted)
    return {"jordan.json": dumps(out)}


def _same_structures(a, b, tol: float = 1e-6) -> bool:
    if len(a) != len(b):
        return False
    remaining = list(b)
    for s in a:
        match = [t for t in remaining if abs(t.eigenvalue - s.eigenvalue) <= tol and t.segre == s.segre]
        if not match:
            return False
        remaining.remove(match[0])
    return True


def _exact_center(center: complex) -> GaussianRational:
    return GaussianRational(
        as_rational(round(center.real, 12)), as_rational(round(center.imag, 12))
    )


def _exact_polynomial(doc, center: GaussianRational):
    """Exact Γ-polynomial around ``center``; ``None`` when no exact form applies."""
    from .perturb import char_poly_in_gamma, preset_family, qutrit_case_i_cubic_factor

    name, params = _preset_info(doc)
    if name is None:
        spec = model_from_dict(doc)
        if not spec.intra_jumps:
            return None, []

        def builder(gamma, omega):
            return build_parts(spec.with_jump_rates(gamma), exact=True).lindbladian_eff

        poly = char_poly_in_gamma(builder, omega=0)
    else:
        params.pop("jump_rate", None)
        family = preset_family(name, exact=True, **params)
        if params.get("omega") is not None:
            poly = char_poly_in_gamma(family, omega=as_rational(params["omega"]))
        elif name.startswith("qubit"):
            gi, ge = as_rational(params["gamma_i"]), as_rational(params["gamma_e"])
            poly = char_poly_in_gamma(family, omega=abs(gi - ge) / 4)
        else:
            gh, ge = as_rational(params["gamma_h"]), as_rational(params["gamma_e"])
            poly = char_poly_in_gamma(family, omega_squared=(gh - ge) ** 2 / 32)
    notes = []
    poly = poly.shift(center)
    if name == "qutrit_i":
        gh, ge = params["gamma_h"], params["gamma_e"]
        try:
            poly = poly.exact_divide(qutrit_case_i_cubic_factor(gh, ge))
            notes.append("divided out the exactly solvable cubic factor")
        except ArithmeticError:
            pass
    poly, removed = poly.deflate()
    if removed:
        notes.append(f"removed {removed} roots pinned at the center")
    return poly, notes


def cmd_perturb(doc, options) -> dict:
    from .perturb import newton_diagram, preset_family, splitting_exponent_fit

    name, params = _preset_info(doc)
    if name is not None:
        params.pop("jump_rate", None)
        family = preset_family(name, exact=False, **params)
    else:
        spec = model_from_dict(doc)
        if not spec.intra_jumps:
            raise ConfigError("perturb needs a model with intra-excited jumps")

        def family(gamma):
            return build_parts(spec.with_jump_rates(float(gamma))).lindbladian_eff

    g = options.get("gammas", {})
    gammas = np.logspace(np.log10(g.get("min", 1e-8)), np.log10(g.get("max", 1e-4)), g.get("num", 12))
    if "center" in options:
        center = complex(*options["center"])
    else:
        clusters = detect_structure(family(0.0), options.get("cluster_tol", DEFAULT_CLUSTER_TOL))
        center = max(clusters, key=lambda s: (s.multiplicity, -s.eigenvalue.real)).eigenvalue
    fit = splitting_exponent_fit(family, gammas, center, jobs=options.get("jobs", 1))

    exact_center = _exact_center(center)
    poly, notes = _exact_polynomial(doc, exact_center)
    diagram = None
    if poly is not None and poly.degree > 0:
        d = newton_diagram(poly)
        diagram = {**d.to_dict(), "center": exact_center, "notes": notes,
                   "segment_roots": [[complex(r) for r in s.roots()] for s in d.segments]}

    summary = {
        "center": center,
        "ambiguous_tracking": fit.ambiguous,
        "branches": [f.to_dict() for f in fit.fits],
        "diagram": diagram,
    }
    rows = ["gamma,branch,re_lambda,im_lambda"]
    for k, gam in enumerate(fit.gammas):
        for b in range(fit.branches.shape[1]):
            lam = fit.branches[k, b]
            rows.append(f"{gam:.17g},{b},{lam.real:.17g},{lam.imag:.17g}")
    return {"perturb.json": dumps(summary), "perturb_branches.csv": "\n".join(rows) + "\n"}


def cmd_evolve(doc, options) -> dict:
    from .dynamics import (
        PrefactorFitError,
        evolve,
        jordan_evolve,
        prefactor_degree,
        projector_state,
        time_scale_for,
    )

    spec = model_from_dict(doc)
    parts = build_parts(spec)
    which = options.get("generator", "lindbladian_eff")
    gen = getattr(parts, which)
    full = which == "full_lindbladian"
    dim = spec.n_levels if full else spec.dim
    labels = spec.level_labels() if full else spec.level_labels()[1:]
    level = options.get("initial_level", 0)
    if level >= dim:
        raise ConfigError(f"initial_level {level} out of range for {dim} levels")
    times = _grid(options.get("times"), 0.0, 12.0, 400)
    ts = options.get("time_scale", time_scale_for(spec))
    rate = options.get("rate")
    rho0 = projector_state(dim, level)
    if options.get("method", "expm") == "jordan":
        table = jordan_evolve(jordan_basis(gen), rho0, times, time_scale=ts, rate=rate, labels=labels)
    else:
        table = evolve(gen, rho0, times, time_scale=ts, rate=rate, labels=labels, jobs=options.get("jobs", 1))
    fits = {}
    for k, lab in enumerate(table.level_labels()):
        try:
            f = prefactor_degree(table, k, window=options.get("fit_window", 0.5),
                                 rtol=options.get("fit_rtol", 1e-6))
            fits[lab] = {"degree": f.degree, "residual": f.residual, "coefficients": f.coefficients}
        except PrefactorFitError as exc:
            fits[lab] = {"degree": None, "error": str(exc)}
    summary = {"generator": which, "time_scale": ts, "rate": table.rate, "prefactor_fits": fits}
    return {"evolve.csv": table.to_csv(), "evolve.json": dumps(summary)}


def cmd_qgt(doc, options) -> dict:
    from .qgt import DEFAULT_COND_LIMIT, DIVERGENCE_THRESHOLD, MIN_DIVERGENCE_POWER, metric_scan

    name, params = _preset_info(doc)
    if name is None:
        raise ConfigError("qgt scans the drive of a preset; give a preset model")
    params.pop("omega", None)
    preset(name, **params)  # validate parameters before scanning

    def family(omega):
        return build_parts(preset(name, omega=float(omega), **params)).lindbladian_eff

    grid = _grid(options.get("omegas"), 0.0005, 0.4995, 500)
    scan = metric_scan(
        family,
        grid,
        step=options.get("step"),
        richardson=options.get("richardson", False),
        threshold=options.get("threshold", DIVERGENCE_THRESHOLD),
        min_power=options.get("min_power", MIN_DIVERGENCE_POWER),
        cond_limit=options.get("cond_limit", DEFAULT_COND_LIMIT),
        jobs=options.get("jobs", 1),
    )
    summary = {"critical_points": [c.to_dict() for c in scan.critical_points]}
    return {"qgt.csv": scan.to_csv(), "qgt_critical.json": dumps(summary)}


def cmd_verify(doc, options) -> dict:
    from .acceptance import run

    results = run(options.get("criteria"), jobs=options.get("jobs", 1))
    for r in results:
        print(r.line())
    summary = {"passed": all(r.passed for r in results), "criteria": [r.to_dict() for r in results]}
    return {"verify.json": dumps(summary)}


HANDLERS = {
    "spectrum": cmd_spectrum,
    "jordan": cmd_jordan,
    "perturb": cmd_perturb,
    "evolve": cmd_evolve,
    "qgt": cmd_qgt,
    "verify": cmd_verify,
}


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mbep", description="Multi-block EP analysis of small open systems.")
    parser.add_argument("--version", action="version", version=f"mbep {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON model file with an optional command block")
    parser.add_argument("--preset", help="model preset name (replaces the model in --config)")
    parser.add_argument("--param", action="append", metavar="K=V", help="preset parameter, repeatable")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--jobs", type=int, help="worker cap for parallel sections")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("mbep: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        doc, options = load_config(args)
        if args.command != "verify":
            model_from_dict(doc)
        files = HANDLERS[args.command](doc, options)
    except (ConfigError, ModelError) as exc:
        print(f"mbep: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"mbep: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for fname, text in files.items():
        (out / fname).write_text(text)
    if args.command == "verify" and not json.loads(files["verify.json"])["passed"]:
        return EXIT_VERIFY
    return 0


if __name__ == "__main__":
    sys.exit(main())
