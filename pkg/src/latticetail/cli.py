"""Command-line front end: ``simulate``, ``fit``, ``verify`` and ``decode``.

Exit codes: 0 ok, 2 configuration/schema error, 3 I/O error, 4 unreliable fit.
"""
import argparse
import csv
import json
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__, gaussint
from .decoder import solve
from .linalg import qrd, sub_gram_dets
from .montecarlo import (CCDF, TrialConfig, complex_normal, fit_tail, run_trials,
                         verify_theorem_conditions)
from .preproc import (Method, clll_violations, is_permutation, lr_identity_check,
                      preprocess)

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_UNRELIABLE = 0, 2, 3, 4

CONFIG_KEYS = {f.name for f in fields(TrialConfig)}
REQUIRED_KEYS = ("n", "m", "snr_db", "trials", "seed")
INT_KEYS = ("n", "m", "trials", "seed")


class ConfigError(Exception):
    pass


def load_config(path, overrides=None):
    """Parse a flat JSON config into a :class:`TrialConfig`; unknown keys are errors."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_dict(raw)


def config_from_dict(raw):
    unknown = sorted(set(raw) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError(f"missing required config key(s): {', '.join(missing)}")
    for k in INT_KEYS:
        if isinstance(raw[k], bool) or not isinstance(raw[k], int):
            raise ConfigError(f"config key '{k}' must be an integer")
    if "method" in raw and raw["method"] not in {m.value for m in Method}:
        raise ConfigError("config key 'method' must be one of qrd, vblast, lll")
    try:
        return TrialConfig(**raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def write_samples(path, samples):
    m = samples.config.m
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "found", "censored", "S_total"] + [f"S_{k}" for k in range(1, m + 1)])
        total = samples.total
        for i in range(samples.trials):
            w.writerow([i, int(samples.found[i]), int(samples.censored[i]), int(total[i])]
                       + [int(c) for c in samples.counts[i]])


def write_ccdf(path, ccdf):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["L", "p"])
        for L, p in zip(ccdf.thresholds, ccdf.probabilities):
            w.writerow([int(L), repr(float(p))])


def read_ccdf(path):
    """Load an ``L,p`` CSV; raises :class:`ConfigError` on schema violations."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["L", "p"]:
        raise ConfigError(f"{path}: header must be 'L,p'")
    L, p = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ConfigError(f"{path}:{lineno}: expected 2 columns")
        try:
            L.append(float(row[0]))
            p.append(float(row[1]))
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: {exc}") from exc
    L, p = np.array(L), np.array(p)
    if np.any(L <= 0) or np.any((p < 0) | (p > 1)) or np.any(np.diff(L) <= 0):
        raise ConfigError(f"{path}: need ascending positive L and p in [0, 1]")
    if np.any(np.diff(p) > 0):
        raise ConfigError(f"{path}: probabilities must be non-increasing")
    return CCDF(L, p)


def _complex_entry(x, where):
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x, 0.0)
    if (isinstance(x, list) and len(x) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x)):
        return complex(x[0], x[1])
    raise ConfigError(f"{where}: complex entries must be [re, im] pairs")


def read_matrix(path):
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) and r for r in raw):
        raise ConfigError(f"{path}: matrix must be a nonempty list of rows")
    if len({len(r) for r in raw}) != 1:
        raise ConfigError(f"{path}: rows have different lengths")
    return np.array([[_complex_entry(x, path) for x in row] for row in raw])


def read_vector(path):
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw:
        raise ConfigError(f"{path}: observation must be a nonempty list")
    return np.array([_complex_entry(x, path) for x in raw])


def _emit(obj):
    print(json.dumps(obj, indent=2))


def cmd_simulate(args):
    overrides = {"seed": args.seed, "trials": args.trials, "method": args.method,
                 "node_budget": args.node_budget}
    cfg = load_config(args.config, overrides)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    samples = run_trials(cfg, workers=args.workers)
    wall = time.perf_counter() - t0
    samples_path, ccdf_path, manifest_path = (out / "samples.csv", out / "ccdf.csv",
                                              out / "manifest.json")
    write_samples(samples_path, samples)
    write_ccdf(ccdf_path, samples.ccdf())
    manifest = {
        "config": cfg.as_dict(),
        "version": __version__,
        "rho": cfg.rho,
        "wall_time_s": wall,
        "found_fraction": samples.found_fraction,
        "censored_count": samples.censored_count,
        "files": {"samples": str(samples_path), "ccdf": str(ccdf_path)},
    }
    with open(manifest_path, "w") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    _emit(manifest)
    return EXIT_OK


def cmd_fit(args):
    fit = fit_tail(read_ccdf(args.ccdf), args.q_lo, args.q_hi)
    _emit(fit.as_dict())
    return EXIT_OK if fit.reliable else EXIT_UNRELIABLE


def deterministic_checks(cfg, draws=200):
    """Preprocessing identities on random instances for every method."""
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(2**32 + 1,)))
    out = {}
    for method in Method:
        worst_lr, worst_vol, unimodular, shape_ok = 0.0, 0.0, True, True
        for _ in range(draws):
            h = complex_normal(rng, (cfg.n, cfg.m), 1.0 / cfg.m)
            res = preprocess(h, method)
            ok, resid = lr_identity_check(h, res)
            worst_lr = max(worst_lr, resid / np.linalg.norm(qrd(h).r))
            g, gt = sub_gram_dets(qrd(h).r)[-1], sub_gram_dets(res.r_tilde)[-1]
            worst_vol = max(worst_vol, abs(gt - g) / g)
            unimodular &= gaussint.is_unimodular(res.t)
            if method is Method.CLLL:
                shape_ok &= not clll_violations(res.r_tilde)
            elif method is Method.VBLAST:
                shape_ok &= is_permutation(res.t)
        out[method.value] = {
            "passed": bool(worst_lr <= 1e-8 and worst_vol <= 1e-9 and unimodular and shape_ok),
            "lr_identity_rel_residual": worst_lr,
            "volume_rel_error": worst_vol,
            "unimodular": bool(unimodular),
            "method_postconditions": bool(shape_ok),
        }
    return out


def cmd_verify(args):
    cfg = load_config(args.config, {"seed": args.seed, "method": args.method})
    report = verify_theorem_conditions(cfg, max(1000, cfg.trials))
    preproc = deterministic_checks(cfg)
    ok = report.deterministic_ok and all(v["passed"] for v in preproc.values())
    _emit({"deterministic_ok": ok, "conditions": report.as_dict(), "preprocessing": preproc})
    return EXIT_OK if ok else EXIT_CONFIG


def cmd_decode(args):
    h = read_matrix(args.matrix)
    r = read_vector(args.observation)
    if r.shape[0] != h.shape[0]:
        raise ConfigError(f"observation length {r.shape[0]} does not match {h.shape[0]} matrix rows")
    if h.shape[0] < h.shape[1]:
        raise ConfigError(f"matrix must have N >= M, got {h.shape[0]}x{h.shape[1]}")
    res = solve(h, r, args.rho, args.method)
    _emit({
        "found": res.found,
        "solution": None if res.solution is None else [list(p) for p in res.solution],
        "objective": res.objective,
        "layer_counts": list(res.layer_counts),
        "total": res.total,
    })
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="latticetail",
                                description="Sphere-decoder complexity tails on random lattices")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte Carlo batch and write samples/ccdf/manifest")
    s.add_argument("--config", required=True)
    s.add_argument("--out-dir", default="out")
    s.add_argument("--seed", type=int)
    s.add_argument("--trials", type=int)
    s.add_argument("--method", choices=[m.value for m in Method])
    s.add_argument("--node-budget", type=int)
    s.add_argument("--workers", type=int, help="worker processes (default: $LATTICETAIL_THREADS or CPU count)")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit a Pareto tail exponent to a ccdf CSV")
    f.add_argument("ccdf")
    f.add_argument("--q-lo", type=float, default=0.90)
    f.add_argument("--q-hi", type=float, default=0.999)
    f.set_defaults(func=cmd_fit)

    v = sub.add_parser("verify", help="check the tail-theorem conditions for a configuration")
    v.add_argument("--config", required=True)
    v.add_argument("--seed", type=int)
    v.add_argument("--method", choices=[m.value for m in Method])
    v.set_defaults(func=cmd_verify)

    d = sub.add_parser("decode", help="decode a single instance")
    d.add_argument("matrix")
    d.add_argument("observation")
    d.add_argument("--rho", type=float, required=True)
    d.add_argument("--method", choices=[m.value for m in Method], default="qrd")
    d.set_defaults(func=cmd_decode)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
