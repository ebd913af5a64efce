"""Command-line driver: parameter sweeps, ratio curves, crossover and
split-optimum searches, and the cross-representation check suite.

Sweep outputs are deterministic CSV files: `#`-prefixed header comments
carry the full resolved parameter set, so any output file doubles as a
config (`--config file.csv` reruns it); explicit flags override config
values.  Exit codes: 0 success, 2 bad parameters, 3 crossover not found,
4 check-suite failure, 5 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .bargmann import GridResourceError
from .checks import run_invariant_suite
from .metrics import (FiConvergenceError, asymptotic_snr, find_crossover,
                      optimize_ds_split, probe_family, snr)
from .states import ProbeSpec, Scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NOT_FOUND = 3
EXIT_CHECK_FAILED = 4
EXIT_NUMERIC = 5

_DEFAULTS = {
    "kappa": 0.01,
    "nb": 600.0,
    "ni": None,          # resolved per method: 1e6 for cc, 1.0 for fi
    "modes": 1_000_000,
    "detector": "onoff",
    "method": "cc",
    "ns_min": 1e-4,
    "ns_max": 1.0,
    "ns_count": 30,
    "states": "coherent,tmsv,cct",
    "pairs": "tmsv/coherent,tmsv/cct,coherent/cct",
    "ds_split": 0.918,
    "asymptotic": "refined",
    "workers": 1,
}
_FLOAT_KEYS = {"kappa", "nb", "ni", "ns_min", "ns_max", "ds_split"}
_INT_KEYS = {"modes", "ns_count", "workers"}


def _parse_config_file(path):
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                line = line[1:].strip()
            if "=" not in line or line.startswith("n_s,"):
                continue
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            if key in _DEFAULTS:
                values[key] = val.strip()
    return values


def _coerce(key, val):
    if val is None:
        return None
    if key in _FLOAT_KEYS:
        return float(val)
    if key in _INT_KEYS:
        return int(float(val))
    return str(val)


def _resolve(args):
    """Merge defaults < config file < explicit flags, typed."""
    cfg = _parse_config_file(args.config) if getattr(args, "config", None) else {}
    out = {}
    for key, default in _DEFAULTS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            out[key] = _coerce(key, flag)
        elif key in cfg:
            out[key] = _coerce(key, cfg[key])
        else:
            out[key] = default
    if out["ni"] is None:
        out["ni"] = 1.0 if out["method"] == "fi" else 1e6
    if not (0.0 < out["ns_min"] < out["ns_max"]) or out["ns_count"] < 2:
        raise ValueError("need 0 < ns-min < ns-max and ns-count >= 2")
    return out


def _make_probe(state, ns, cfg):
    state = state.strip().lower()
    if state == "coherent":
        return ProbeSpec.coherent(ns)
    if state == "tmsv":
        return ProbeSpec.tmsv(ns)
    if state == "cct":
        return ProbeSpec.cct(ns, cfg["ni"])
    if state == "ds":
        return ProbeSpec.ds_from_split(ns, cfg["ds_split"])
    raise ValueError(f"unknown state {state!r}")


def _fmt(x):
    if x != x or x in (float("inf"), float("-inf")):
        return str(x)
    return f"{x:.11e}"


def _header_lines(kind, cfg, keys):
    lines = [f"# qillum {kind}"]
    for key in sorted(keys):
        val = cfg[key]
        lines.append(f"# {key}={val!r}" if isinstance(val, float)
                     else f"# {key}={val}")
    return lines


def _grid(cfg):
    return np.geomspace(cfg["ns_min"], cfg["ns_max"], cfg["ns_count"])


def _eval_point(task):
    state, ns, cfg = task
    probe = _make_probe(state, ns, cfg)
    scn = Scenario(probe, cfg["kappa"], cfg["nb"], cfg["modes"])
    rep = snr(scn, cfg["method"], cfg["detector"])
    asym = asymptotic_snr(scn, cfg["method"], cfg["detector"],
                          variant=cfg["asymptotic"])
    return rep.exact, asym


def _eval_many(tasks, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_eval_point, tasks, chunksize=4))
    return [_eval_point(t) for t in tasks]


def _write_text(path, lines):
    data = "\n".join(lines) + "\n"
    if path in (None, "-"):
        sys.stdout.write(data)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(data)


def cmd_sweep(args):
    cfg = _resolve(args)
    states = [s.strip() for s in cfg["states"].split(",") if s.strip()]
    tasks = [(state, float(ns), cfg) for ns in _grid(cfg) for state in states]
    results = _eval_many(tasks, cfg["workers"])
    keys = ("states", "detector", "method", "kappa", "nb", "ni", "modes",
            "ns_min", "ns_max", "ns_count", "ds_split", "asymptotic")
    lines = _header_lines("sweep", cfg, keys)
    lines.append("n_s,state,detector,method,snr_exact,snr_asymptotic")
    for (state, ns, _), (exact, asym) in zip(tasks, results):
        lines.append(f"{_fmt(ns)},{state},{cfg['detector']},{cfg['method']},"
                     f"{_fmt(exact)},{_fmt(asym)}")
    _write_text(args.out, lines)
    return EXIT_OK


def cmd_ratio(args):
    cfg = _resolve(args)
    pairs = [p.strip() for p in cfg["pairs"].split(",") if p.strip()]
    states = sorted({s for pair in pairs for s in pair.split("/")})
    tasks = [(state, float(ns), cfg) for ns in _grid(cfg) for state in states]
    results = dict(zip([(t[0], t[1]) for t in tasks],
                       _eval_many(tasks, cfg["workers"])))
    keys = ("pairs", "detector", "method", "kappa", "nb", "ni", "modes",
            "ns_min", "ns_max", "ns_count", "ds_split", "asymptotic")
    lines = _header_lines("ratio", cfg, keys)
    lines.append("n_s,pair,ratio")
    for ns in _grid(cfg):
        for pair in pairs:
            top, bottom = pair.split("/")
            num = results[(top, float(ns))][0]
            den = results[(bottom, float(ns))][0]
            ratio = float("inf") if den == 0.0 else num / den
            lines.append(f"{_fmt(float(ns))},{pair},{_fmt(ratio)}")
    _write_text(args.out, lines)
    return EXIT_OK


def cmd_crossover(args):
    cfg = _resolve(args)

    def family(name):
        name = name.strip().lower()
        if name == "cct":
            return probe_family("cct", n_idler=cfg["ni"])
        if name == "ds":
            return probe_family("ds", split=cfg["ds_split"])
        return probe_family(name)

    ns = find_crossover(family(args.probe_a), family(args.probe_b),
                        (cfg["ns_min"], cfg["ns_max"]),
                        kappa=cfg["kappa"], n_bath=cfg["nb"],
                        modes=cfg["modes"], detector=cfg["detector"],
                        method=cfg["method"])
    report = {"probe_a": args.probe_a, "probe_b": args.probe_b,
              "detector": cfg["detector"], "method": cfg["method"],
              "kappa": cfg["kappa"], "nb": cfg["nb"], "ni": cfg["ni"],
              "modes": cfg["modes"], "found": ns is not None, "n_s": ns}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    if ns is None:
        print("no SNR crossover on the requested range")
        return EXIT_NOT_FOUND
    print(f"SNR crossover {args.probe_a} vs {args.probe_b} "
          f"({cfg['method']}/{cfg['detector']}, kappa={cfg['kappa']}, "
          f"nb={cfg['nb']}): N_S = {ns:.6g}")
    return EXIT_OK


def cmd_optimize(args):
    cfg = _resolve(args)
    ns = args.ns if args.ns is not None else 1.0
    res = optimize_ds_split(ns, cfg["kappa"], cfg["nb"],
                            detector=cfg["detector"], method=cfg["method"],
                            modes=cfg["modes"])
    report = {"n_signal": ns, "kappa": cfg["kappa"], "nb": cfg["nb"],
              "detector": cfg["detector"], "method": cfg["method"],
              "modes": cfg["modes"], "alpha_sq": res.alpha_sq,
              "snr": res.snr, "flat": res.flat}
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    note = " (objective flat)" if res.flat else ""
    print(f"best split at N_S={ns:g}: |alpha|^2 = {res.alpha_sq:.6g}, "
          f"SNR = {res.snr:.6g}{note}")
    return EXIT_OK


def cmd_check(args):
    results = run_invariant_suite(quick=args.quick,
                                  progress=lambda r: print(
                                      f"{'PASS' if r.passed else 'FAIL'} "
                                      f"{r.name}: {r.detail}", flush=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump([{"name": r.name, "passed": bool(r.passed),
                        "detail": r.detail} for r in results], fh, indent=2)
            fh.write("\n")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def _add_common(sub):
    sub.add_argument("--kappa", type=float, help="target reflectivity")
    sub.add_argument("--nb", type=float, help="thermal photons at the detector")
    sub.add_argument("--ni", type=float,
                     help="CCT idler mean photons (default 1e6 for cc, 1 for fi)")
    sub.add_argument("--modes", type=int, help="number of probe mode pairs M")
    sub.add_argument("--detector", choices=("onoff", "pnr"))
    sub.add_argument("--method", choices=("cc", "fi"))
    sub.add_argument("--ns-min", dest="ns_min", type=float)
    sub.add_argument("--ns-max", dest="ns_max", type=float)
    sub.add_argument("--ns-count", dest="ns_count", type=int)
    sub.add_argument("--ds-split", dest="ds_split", type=float,
                     help="|alpha|^2 / N_S for the ds state")
    sub.add_argument("--asymptotic", choices=("refined", "table"))
    sub.add_argument("--workers", type=int, help="parallel sweep workers")
    sub.add_argument("--config", help="key=value file (or a previous CSV)")
    sub.add_argument("--out", help="output path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qillum",
        description="SNR engine for Gaussian-probe target detection "
                    "with photon counting")
    subs = parser.add_subparsers(dest="command", required=True)

    sweep = subs.add_parser("sweep", help="SNR vs N_S curves as CSV")
    sweep.add_argument("--state", action="append", dest="state_list",
                       help="probe state (repeatable): coherent|ds|tmsv|cct")
    _add_common(sweep)
    sweep.set_defaults(fn=cmd_sweep)

    ratio = subs.add_parser("ratio", help="SNR ratio curves as CSV")
    ratio.add_argument("--pair", action="append", dest="pair_list",
                       help="ratio pair like tmsv/coherent (repeatable)")
    _add_common(ratio)
    ratio.set_defaults(fn=cmd_ratio)

    cross = subs.add_parser("crossover", help="locate an SNR crossover in N_S")
    cross.add_argument("probe_a")
    cross.add_argument("probe_b")
    _add_common(cross)
    cross.set_defaults(fn=cmd_crossover)

    opt = subs.add_parser("optimize", help="best DS coherent/squeezed split")
    opt.add_argument("--ns", type=float, help="total signal photons (default 1)")
    _add_common(opt)
    opt.set_defaults(fn=cmd_optimize)

    chk = subs.add_parser("check", help="run the invariant suite")
    chk.add_argument("--quick", action="store_true",
                     help="reduced parameter lattice")
    chk.add_argument("--out", help="JSON report path")
    chk.set_defaults(fn=cmd_check)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "state_list", None):
        args.states = ",".join(args.state_list)
    else:
        args.states = None
    if getattr(args, "pair_list", None):
        args.pairs = ",".join(args.pair_list)
    else:
        args.pairs = None
    try:
        return args.fn(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FiConvergenceError, GridResourceError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
