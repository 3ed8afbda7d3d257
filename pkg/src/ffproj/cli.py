"""Command-line front end.

``ffproj run --config PATH --analysis NAME --out DIR`` runs one analysis and
writes ``NAME.csv`` plus a JSON summary ``NAME.json``. Exit status: 0 on
success, 1 when a verification fails, 2 on configuration errors.
"""
import argparse
from concurrent.futures import ThreadPoolExecutor
import datetime
import json
from importlib import resources
import math
import os
import sys

import numpy as np

from . import boundary as bd
from . import hamiltonian as hm
from . import states
from . import subspace as sub
from .config import (ANALYSES, ConfigError, RunConfig, build_interaction, build_system, fixture,
                     fixture_names, list_fixtures, load_run_config)
from .ffsys import check_equivariance, check_ff, check_proper
from .regions import Region, box, enumerate_translates, interval

__all__ = ["main", "run", "window_label", "csv_schema", "format_value"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class VerificationFailed(Exception):
    pass


def csv_schema():
    text = resources.files("ffproj").joinpath("data/csv_schema.json").read_text()
    return json.loads(text)


def format_value(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return "%.12e" % x
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        if math.isinf(x) or math.isnan(x):
            return str(x)
        return float("%.12e" % x)
    if isinstance(x, dict):
        return {k: _json_value(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_value(v) for v in x]
    return x


def window_label(lam):
    """``lo:hi`` per axis for boxes (half-open), else the site list."""
    if lam.is_box():
        return ";".join(f"{lo}:{hi + 1}" for lo, hi in lam.bounds())
    return "|".join(",".join(str(c) for c in s) for s in lam.sites)


def _pmap(fn, items, jobs):
    if not jobs or jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# --------------------------------------------------------------------------
# ladders


def _window(model, sizes_or_sites):
    if isinstance(sizes_or_sites, list):
        return Region.from_json(sizes_or_sites, model.lattice_dim)
    n = int(sizes_or_sites)
    if model.lattice_dim != 1:
        raise ConfigError("size ladders are only defined on chains; give site lists", "ladder")
    return interval(model.origin[0], model.origin[0] + n)


def _ladder(cfg, system):
    if cfg.ladder is not None:
        ladder = [_window(cfg.model, w) for w in cfg.ladder]
    elif cfg.model.lattice_dim == 1:
        lo = cfg.model.origin[0]
        ladder = [interval(lo, lo + n) for n in range(1, cfg.model.shape[0] + 1)]
        ladder = [w for w in ladder if w in system]
    else:
        ladder = list(states.default_ladder(system.windows))
    missing = [w for w in ladder if w not in system]
    if missing:
        raise ConfigError(f"window {window_label(missing[0])} is not stored by the model",
                          "ladder")
    if not ladder:
        raise ConfigError("empty ladder", "ladder")
    return ladder


def _centered_ladder(cfg, system):
    """Windows grown alternately left and right around a central site."""
    if cfg.ladder is not None or cfg.model.lattice_dim != 1:
        ladder = _ladder(cfg, system)
        return ladder, Region((ladder[0].sites[0],), cfg.model.lattice_dim)
    lo0 = cfg.model.origin[0]
    hi0 = lo0 + cfg.model.shape[0]
    c = lo0 + (cfg.model.shape[0] - 1) // 2
    a, b, grow_left = c, c + 1, False
    ladder = [interval(a, b)] if interval(a, b) in system else []
    while a > lo0 or b < hi0:
        if (grow_left and a > lo0) or b == hi0:
            a -= 1
        else:
            b += 1
        grow_left = not grow_left
        if interval(a, b) in system:
            ladder.append(interval(a, b))
    if not ladder:
        raise ConfigError("no stored window around the central site", "ladder")
    return ladder, interval(c, c + 1)


# --------------------------------------------------------------------------
# analyses; each returns (ok, header, rows, headline)


def _verify_ff(cfg, system, tol, jobs):
    rep = check_ff(system, tol, jobs=jobs)
    rows = [(window_label(a), window_label(b), v) for (a, b), v in rep.residuals]
    shifts = [tuple(int(i == k) for i in range(cfg.model.lattice_dim))
              for k in range(cfg.model.lattice_dim)]
    eq = check_equivariance(system, shifts, tol, strict=False)
    headline = {"worst_residual": rep.worst_residual, "pairs": len(rows),
                "proper": check_proper(system), "equivariant": eq.ok}
    ok = rep.ok
    if cfg.model.kind == "interaction":
        q = build_interaction(cfg.model)
        model_rep = hm.is_ff_model(q, system.windows, tol)
        headline["ff_model"] = model_rep.ok
        headline["violations"] = [window_label(w) for w in model_rep.violations]
        ok = ok and model_rep.ok
    return ok, ("small", "large", "residual"), rows, headline


def _spectra(cfg, system, tol, jobs):
    ladder = _ladder(cfg, system)
    if cfg.model.kind == "interaction":
        q = build_interaction(cfg.model)
        ladder = [w for w in ladder if enumerate_translates(q.delta, w)]
        hams = _pmap(lambda w: hm.assemble(q, w), ladder, jobs)
        ok = hm.is_ff_model(q, ladder, tol).ok
        q_min = float(np.linalg.eigvalsh(q.q.matrix)[0])
    else:
        delta = next((w for w in ladder if system[w].rank > 0), None)
        if delta is None:
            raise ConfigError("every ladder window has p = 0; nothing to assemble", "ladder")
        ladder = [w for w in ladder if delta.issubset(w)]
        try:
            hams = _pmap(lambda w: hm.assemble_from_system(system, delta, w, tol), ladder, jobs)
        except ValueError as exc:
            raise VerificationFailed(str(exc)) from None
        ok = all(abs(h.epsilon) <= tol for h in hams)
        q_min = 0.0
    rows = []
    for w, h in zip(ladder, hams):
        lowest = float(np.linalg.eigvalsh(h.h.matrix)[0])
        zeros = int(np.count_nonzero(h.spectrum <= hm.zero_threshold(h.spectrum)))
        rows.append((window_label(w), h.epsilon, lowest, hm.spectral_gap(h), zeros))
        ok = ok and abs(lowest) <= max(tol, 1e-10)
    headline = {"windows": len(rows), "min_spec_q": q_min,
                "last_gap": rows[-1][3] if rows else None}
    return ok, ("window", "epsilon", "min", "gap", "corank"), rows, headline


def _observables(cfg, d):
    if cfg.observables:
        obs = {}
        for k, m in cfg.observables.items():
            if m.shape != (d, d):
                raise ConfigError(f"must be a {d}x{d} single-site matrix", f"observables.{k}")
            obs[k] = m
        return obs
    return {"proj0": np.diag(np.eye(d)[0]).astype(complex),
            "z": np.diag(np.linspace(1.0, -1.0, d)).astype(complex)}


def _ltqo(cfg, system, tol, jobs):
    ladder, site = _centered_ladder(cfg, system)
    ladder = [w for w in ladder if system[w].corank > 0]
    if not ladder:
        raise ConfigError("p is the identity on every ladder window", "ladder")
    obs = {k: sub.LocalOperator(m, site, system.d)
           for k, m in _observables(cfg, system.d).items()}
    scan = states.ltqo_scan(system, obs, ladder)
    rows = [(window_label(w), len(w), oid, v, scan.coranks[w]) for w, oid, v in scan.rows]
    last = {oid: v for w, oid, v in scan.rows if w == ladder[-1]}
    headline = {"unique_indicator": scan.unique_indicator, "observable_site": list(site.sites[0]),
                "final_norms": last}
    return True, ("window", "window_size", "observable_id", "norm", "corank"), rows, headline


def _boundary(cfg, system, tol, jobs):
    m = cfg.model
    if m.origin[0] != 0:
        raise ConfigError("boundary scans need the bounding box to start at 0 on axis 0",
                          "model.bounding.origin")
    rest = m.shape[1:]

    def win(n):
        return box((n,) + rest, m.origin)

    if cfg.ladder is not None:
        sizes = [int(n) if not isinstance(n, list) else None for n in cfg.ladder]
        if None in sizes:
            raise ConfigError("boundary ladders are given as extents along axis 0", "ladder")
    else:
        sizes = [n for n in range(1, m.shape[0] - cfg.extra + 1)
                 if win(n) in system and win(n + cfg.extra) in system
                 and system[win(n)].corank > 0]
    rungs = [(win(n), win(n + cfg.extra)) for n in sizes]
    for lam, gam in rungs:
        if lam not in system or gam not in system:
            raise ConfigError(f"rung {window_label(lam)} / {window_label(gam)} is not stored",
                              "ladder")
    if not rungs:
        raise ConfigError("no rung fits inside the bounding box", "extra")
    scan = bd.boundary_dim_scan(system, rungs, tol)
    rows = [r.csv_row() for r in scan]
    headline = {
        "dims": [r.boundary_dim for r in scan],
        "stabilized": scan[-1].stabilized if len(scan) > 1 else None,
        "consistent": all(r.consistent for r in scan),
        "injective": all(r.injective for r in scan),
        "invariant_dims": [r.invariant_dim for r in scan],
        "near_null": [list(r.near_null) for r in scan],
    }
    return True, ("n", "gamma_size", "boundary_dim", "stabilized", "trace_estimate",
                  "lower_bound"), rows, headline


def _trace(cfg, system, tol, jobs):
    ladder = _ladder(cfg, system)
    est = bd.cuntz_trace_estimate(system, ladder)
    rows = [(window_label(r.window), len(r.window), r.corank, r.estimate, r.lower_bound)
            for r in est]
    ok = all(r.estimate >= r.lower_bound - tol for r in est)
    headline = {"final_estimate": est[-1].estimate, "proper": all(r.estimate < 1 for r in est)}
    return ok, ("window", "window_size", "corank", "trace_estimate", "lower_bound"), rows, headline


def _hereditary(cfg, system, tol, jobs):
    top = system.windows[-1]
    if not all(w.issubset(top) for w in system.windows):
        raise ConfigError("largest window must contain every other window", "model")
    if system[top].corank == 0:
        raise VerificationFailed("no frustration-free vector on the largest window")
    omega = states.WindowState.ground_state_mixture(system, top)
    trunc = states.localized_unit(omega)
    rows = []
    worst = 0.0
    for w in system.windows:
        dist = sub.opnorm(trunc.unit[w].matrix - system[w].matrix)
        worst = max(worst, dist)
        rows.append((window_label(w), system[w].corank, trunc.unit[w].corank, dist))
    resid = states.property_f_residual(trunc.unit, trunc.ladder)
    # the unit can be strictly larger than the system where marginals of the
    # top-window state do not fill the local kernels; that is reported, not failed
    ok = trunc.monotone
    headline = {"monotone": trunc.monotone, "max_distance": worst,
                "reproduces_system": worst <= max(tol, 1e-8),
                "property_f_residual": resid, "ladder_length": len(trunc.ladder)}
    return ok, ("window", "corank", "unit_corank", "distance"), rows, headline


_RUNNERS = {
    "verify-ff": _verify_ff,
    "spectra": _spectra,
    "ltqo": _ltqo,
    "boundary": _boundary,
    "trace": _trace,
    "hereditary": _hereditary,
}


def run(cfg, out_dir, jobs=1, timestamp=True):
    """Run one analysis; write ``<analysis>.csv`` and ``<analysis>.json``.

    Returns ``(exit_code, summary)``.
    """
    tol = cfg.tol if cfg.tol is not None else cfg.model.tol
    system = build_system(cfg.model, tol)
    try:
        ok, header, rows, headline = _RUNNERS[cfg.analysis](cfg, system, tol, jobs)
    except VerificationFailed as exc:
        ok, header, rows, headline = False, ("message",), [(str(exc),)], {"error": str(exc)}
    os.makedirs(out_dir, exist_ok=True)
    stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    lines = []
    if timestamp:
        lines.append(f"# generated {stamp}")
    lines.append(",".join(header))
    lines.extend(",".join(format_value(x) for x in row) for row in rows)
    with open(os.path.join(out_dir, f"{cfg.analysis}.csv"), "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    summary = {"analysis": cfg.analysis, "model": cfg.model.name, "ok": bool(ok), "tol": tol,
               "headline": _json_value(headline)}
    if timestamp:
        summary["generated"] = stamp
    with open(os.path.join(out_dir, f"{cfg.analysis}.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return (EXIT_OK if ok else EXIT_FAIL), summary


def _schema_epilog():
    try:
        schema = csv_schema()
    except (OSError, ValueError):
        return None
    parts = ["CSV columns per analysis:"]
    for name in ANALYSES:
        cols = ", ".join(c["name"] for c in schema[name]["columns"])
        parts.append(f"  {name}: {cols}")
    return "\n".join(parts)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="ffproj", description="Frustration-free projector systems: analyses and fixtures.")
    cmds = parser.add_subparsers(dest="command", required=True)
    r = cmds.add_parser("run", help="run one analysis", epilog=_schema_epilog(),
                        formatter_class=argparse.RawDescriptionHelpFormatter)
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", metavar="PATH", help="run config or bare model spec (JSON)")
    src.add_argument("--fixture", metavar="NAME", help="use a bundled fixture as the model")
    r.add_argument("--analysis", choices=ANALYSES, help="overrides the config's analysis")
    r.add_argument("--out", metavar="DIR", default="ffproj-out", help="output directory")
    r.add_argument("--jobs", metavar="N", type=int, default=1, help="worker threads")
    r.add_argument("--tol", metavar="X", type=float, help="override the tolerance")
    r.add_argument("--no-timestamp", action="store_true",
                   help="omit the timestamp line/field so outputs are byte-identical")
    f = cmds.add_parser("fixtures", help="list bundled model fixtures")
    f.add_argument("--dump", metavar="NAME", help="print the JSON spec of one fixture")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    if args.command == "fixtures":
        if args.dump:
            if args.dump not in fixture_names():
                print(f"error: unknown fixture {args.dump!r}", file=sys.stderr)
                return EXIT_CONFIG
            print(json.dumps(fixture(args.dump).to_json(), indent=2))
            return EXIT_OK
        for name, kind, d, shape, note in list_fixtures():
            print(f"{name}\t{kind}\td={d}\tshape={'x'.join(map(str, shape))}\t{note}")
        return EXIT_OK
    try:
        if args.fixture:
            if not args.analysis:
                raise ConfigError("--fixture needs --analysis", "analysis")
            cfg = RunConfig(fixture(args.fixture), args.analysis, tol=args.tol)
        else:
            try:
                with open(args.config) as fh:
                    text = fh.read()
            except OSError as exc:
                print(f"error: cannot read config: {exc}", file=sys.stderr)
                return EXIT_CONFIG
            cfg = load_run_config(text, args.analysis, args.tol)
        code, summary = run(cfg, args.out, args.jobs, not args.no_timestamp)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except sub.CapExceededError as exc:
        print(f"size cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = "ok" if code == EXIT_OK else "FAILED"
    print(f"{cfg.analysis} on {cfg.model.name}: {status} -> {args.out}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
