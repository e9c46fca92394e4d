"""Batch experiment driver.

    walsh-hp kernels --resolution 8 --out runs/k
    walsh-hp atom-sweep --resolution 8 --p 0.25,0.5,0.75 --atoms 100 --out runs/a
    walsh-hp counterexample --resolution 10 --alphas 2,5,8 --phi linear --out runs/c
    walsh-hp norms grid.txt --p 0.5

Exit codes: 0 all checks pass, 1 a mathematical check failed, 2 usage or
configuration error.  A ``--config`` file of ``key = value`` lines mirrors
every flag (dashes may be written as underscores); flags override the file.
"""

import argparse
import csv
import io
import json
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__, gridio
from .counterexample import (WEIGHT_KINDS, WeightFn, build_counterexample,
                             coefficient_check, divergence_experiment,
                             expected_odd_magnitude, odd_cells_magnitudes,
                             select_alphas)
from .dyadic import integrate, lp_quasinorm, resolution, weak_lp_quasinorm
from .hardy import atom_corpus, conditional_expectation, hp_quasinorm
from .strong import REGIONS, atom_theorem1_sum
from .walsh import butterfly, dirichlet_kernel, fwht, walsh_matrix

OK, CHECK_FAILED, USAGE = 0, 1, 2
COMMANDS = ("kernels", "atom-sweep", "counterexample", "norms")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    resolution: int = 8
    p: str = "0.5"
    n_max: int = None
    seed: int = 0
    atoms: int = 100
    max_depth: int = 3
    phi: str = "linear"
    alphas: str = None
    auto_alphas: int = None
    parity: str = None
    out: str = None
    threads: int = 1
    grid: str = None
    inject_fault: bool = False
    save_atoms: bool = False

    @property
    def p_values(self):
        return [float(v) for v in str(self.p).split(",") if v.strip()]

    @property
    def alpha_list(self):
        if self.alphas is None:
            return None
        return [int(v) for v in str(self.alphas).split(",") if v.strip()]

    def validate(self):
        try:
            ps = self.p_values
        except ValueError:
            raise UsageError(f"bad --p value {self.p!r}")
        if not ps:
            raise UsageError("--p is empty")
        if self.resolution < 0:
            raise UsageError("--resolution must be >= 0")
        if self.threads < 1:
            raise UsageError("--threads must be >= 1")
        if self.n_max is not None and self.n_max < 1:
            raise UsageError("--n-max must be >= 1")
        if self.parity not in (None, "all", "odd"):
            raise UsageError("--parity must be all or odd")
        if self.phi not in WEIGHT_KINDS[:-1]:
            raise UsageError(f"--phi must be one of {WEIGHT_KINDS[:-1]}")
        if self.command == "kernels" and self.resolution > 12:
            raise UsageError("kernels needs --resolution <= 12")
        if self.command == "atom-sweep":
            if self.atoms < 1:
                raise UsageError("--atoms must be >= 1")
            if any(not 0 < p < 1 for p in ps):
                raise UsageError("atom-sweep needs every p in (0, 1)")
            if self.resolution < 1:
                raise UsageError("atom-sweep needs --resolution >= 1")
            if self.max_depth < 1:
                raise UsageError("--max-depth must be >= 1")
        if self.command == "counterexample":
            if len(ps) != 1 or not 0 < ps[0] < 1:
                raise UsageError("counterexample needs a single p in (0, 1)")
            if self.parity == "all":
                raise UsageError("the divergence sum runs over odd n; --parity must be odd")
            if (self.alphas is None) == (self.auto_alphas is None):
                raise UsageError("give exactly one of --alphas or --auto-alphas")
            try:
                self.alpha_list
            except ValueError:
                raise UsageError(f"bad --alphas value {self.alphas!r}")
        if self.command == "norms" and self.grid is None:
            raise UsageError("norms needs a grid file")
        return self


_INT_KEYS = {"resolution", "n_max", "seed", "atoms", "max_depth", "auto_alphas", "threads"}


def read_config_file(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in RunConfig.__dataclass_fields__ or key == "command":
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _coerce(key, val)
    return out


def _coerce(key, val):
    if key in _INT_KEYS:
        try:
            return int(val)
        except ValueError:
            raise UsageError(f"{key} must be an integer, got {val!r}")
    if key in ("inject_fault", "save_atoms"):
        return val.lower() in ("1", "true", "yes")
    return val


def build_parser():
    ap = argparse.ArgumentParser(prog="walsh-hp", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        if name == "norms":
            sp.add_argument("grid", help="grid file (text or .bin)")
        sp.add_argument("--config", help="key = value file; flags override it")
        sp.add_argument("--resolution", "-N", type=int)
        sp.add_argument("--p", help="exponent, or a comma list for atom-sweep")
        sp.add_argument("--n-max", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--atoms", type=int)
        sp.add_argument("--max-depth", type=int)
        sp.add_argument("--phi", choices=WEIGHT_KINDS[:-1])
        sp.add_argument("--alphas", help="explicit scales, e.g. 2,5,8")
        sp.add_argument("--auto-alphas", type=int, metavar="K")
        sp.add_argument("--parity", choices=("all", "odd"))
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--threads", type=int)
        if name == "kernels":
            sp.add_argument("--inject-fault", action="store_true", default=None,
                            help="corrupt one kernel (negative control)")
        if name == "atom-sweep":
            sp.add_argument("--save-atoms", action="store_true", default=None,
                            help="write each atom grid as a binary file")
    return ap


def resolve_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for key, val in vars(args).items():
        if key in ("config", "command") or val is None:
            continue
        values[key] = val
    return RunConfig(command=args.command, **values).validate()


# ---------------------------------------------------------------------------
# output helpers


def _header(cfg):
    # thread count and output location do not affect results; leaving them
    # out keeps outputs byte-identical across runs that differ only there
    config = {k: v for k, v in asdict(cfg).items() if k not in ("threads", "out")}
    return {"artifact": "walsh_hp", "version": __version__, "config": config}


def _outdir(cfg):
    d = cfg.out or f"walsh-hp-{cfg.command}"
    os.makedirs(d, exist_ok=True)
    return d


def _write_json(cfg, name, payload):
    doc = dict(_header(cfg))
    doc.update(payload)
    path = os.path.join(_outdir(cfg), name)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_plain)
        fh.write("\n")
    return path


def _write_csv(cfg, name, header, rows):
    buf = io.StringIO()
    buf.write("# " + json.dumps(_header(cfg), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    path = os.path.join(_outdir(cfg), name)
    with open(path, "w") as fh:
        fh.write(buf.getvalue())
    return path


def _plain(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    raise TypeError(type(obj))


# ---------------------------------------------------------------------------
# commands


def kernel_checks(N: int, inject_fault: bool = False) -> dict:
    """Exact integer identity suite for the Walsh-Dirichlet kernels at level N."""
    side = 1 << N
    H = walsh_matrix(N)
    direct = np.zeros((side + 1, side), dtype=np.int64)
    np.cumsum(H, axis=0, out=direct[1:])
    closed = np.array([dirichlet_kernel(n, N, "closed") for n in range(side + 1)])
    if inject_fault:
        closed[min(3, side)][0] += 1
    cells = np.arange(side)
    checks = {}
    checks["direct_vs_closed"] = bool(np.array_equal(direct, closed))
    checks["power_of_two_indicator"] = all(
        np.array_equal(closed[1 << k], np.where(cells % (1 << k) == 0, 1 << k, 0))
        for k in range(N + 1))
    ok = True
    for n in range(1, side):
        acc = np.zeros(side, dtype=np.int64)
        for j in range(n.bit_length()):
            if n >> j & 1:
                acc += H[1 << j] * closed[1 << j]
        ok &= np.array_equal(closed[n], H[n] * acc)
    checks["binary_digit_representation"] = bool(ok)
    ok = True
    for a in range(N):
        for n in range(1 << a):
            ok &= np.array_equal(closed[n + (1 << a)],
                                 closed[1 << a] + H[1 << a] * closed[n])
    checks["shift_identity"] = bool(ok)
    ok = True
    if N > 0:
        bound_sum = closed[[1 << i for i in range(N)]].sum(axis=0)
        for s in range(N):
            ring = (cells % (1 << s) == 0) & (cells % (1 << (s + 1)) != 0)
            ok &= bool(np.all(bound_sum[ring] == (1 << (s + 1)) - 1))
    checks["dyadic_sum_bound"] = bool(ok)
    checks["orthonormality"] = bool(np.array_equal(butterfly(H, axes=[1]),
                                                   side * np.eye(side, dtype=np.int64)))
    return checks


def run_kernels(cfg: RunConfig) -> int:
    checks = kernel_checks(cfg.resolution, cfg.inject_fault)
    all_pass = all(checks.values())
    _write_json(cfg, "kernels.json", {"checks": checks, "all_pass": all_pass})
    for name, ok in checks.items():
        print(f"[{'PASS' if ok else 'FAIL'}] {name}")
    return OK if all_pass else CHECK_FAILED


def _sweep_one(atom, p, n_max):
    rep = atom_theorem1_sum(atom, p, n_max)
    return rep.total, rep.region_cumulative[-1], rep.meta["hp_norm"], rep.meta["ratio"]


def run_atom_sweep(cfg: RunConfig) -> int:
    N = cfg.resolution
    n_max = cfg.n_max or 1 << N
    status = OK
    for p in cfg.p_values:
        try:
            corpus = list(atom_corpus(p, cfg.atoms, N, cfg.seed, cfg.max_depth))
        except ValueError as exc:
            print(f"atom validation failed: {exc}", file=sys.stderr)
            return CHECK_FAILED
        atoms = [a for _, _, a in corpus]
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(lambda a: _sweep_one(a, p, n_max), atoms))
        tag = f"p{p:g}"
        rows, manifest = [], []
        for (i, depth, atom), (total, regs, hp, ratio) in zip(corpus, results):
            ref = None
            if cfg.save_atoms:
                os.makedirs(os.path.join(_outdir(cfg), "atoms"), exist_ok=True)
                ref = os.path.join("atoms", f"atom_{tag}_{i:05d}.bin")
                gridio.save(os.path.join(_outdir(cfg), ref), atom.grid, binary=True)
            rows.append([i, atom.support_level, depth, atom.support_base[0],
                         atom.support_base[1], atom.saturation, hp, total,
                         *map(float, regs), ratio])
            manifest.append({"seed": [cfg.seed, i, 1], "index": i, "p": p,
                             "support_level": atom.support_level, "depth": depth,
                             "support_base": list(atom.support_base),
                             "saturation": atom.saturation, "grid": ref})
        _write_csv(cfg, f"atoms_{tag}.csv",
                   ["index", "support_level", "depth", "base_x", "base_y",
                    "saturation", "hp_norm", "cumulative", *REGIONS, "ratio"], rows)
        with open(os.path.join(_outdir(cfg), f"manifest_{tag}.jsonl"), "w") as fh:
            for line in manifest:
                fh.write(json.dumps(line, sort_keys=True) + "\n")
        totals = np.array([r[7] for r in rows])
        regs = np.array([r[8:12] for r in rows])
        finite = bool(np.all(np.isfinite(totals)))
        summary = {
            "p": p, "resolution": N, "n_max": n_max, "atoms": len(rows),
            "sup_cumulative": float(totals.max()),
            "argsup": int(totals.argmax()),
            "sup_regions": dict(zip(REGIONS, map(float, regs.max(axis=0)))),
            "sup_ratio": float(max(r[12] for r in rows)),
            "all_finite": finite,
        }
        _write_json(cfg, f"summary_{tag}.json", summary)
        print(f"p={p:g} N={N}: sup cumulative {summary['sup_cumulative']:.6g} "
              f"over {len(rows)} atoms (sup ratio {summary['sup_ratio']:.6g})")
        if not finite:
            status = CHECK_FAILED
    return status


def counterexample_checks(cm) -> dict:
    """Coefficient layout, pointwise magnitude on (G\\I_1)^2 and the
    restriction property of the realized martingale."""
    coeff = coefficient_check(cm)
    spec = fwht(cm.realized)
    worst = 0.0
    tested = 0
    for a in cm.realized_alphas:
        for n in range((1 << a) + 1, 1 << (a + 1), 2):
            v = odd_cells_magnitudes(cm, n, spec)
            want = expected_odd_magnitude(cm, n)
            worst = max(worst, float(np.abs(v - want).max() / want))
            tested += 1
    restrict = 0.0
    for a in cm.realized_alphas:
        level = a + 1
        got = conditional_expectation(cm.realized, level)
        want = cm.partial(level)
        restrict = max(restrict, float(np.abs(got - want).max() / np.abs(want).max()))
    return {
        "coefficients_integer_exact": coeff["integer_exact"],
        "coefficients_max_rel_err": coeff["max_rel_err"],
        "pointwise_max_rel_err": worst,
        "pointwise_n_tested": tested,
        "restriction_max_rel_err": restrict,
        "pass": bool(coeff["integer_exact"] and coeff["max_rel_err"] <= 1e-12
                     and worst <= 1e-9 and restrict <= 1e-12),
    }


def run_counterexample(cfg: RunConfig) -> int:
    p = cfg.p_values[0]
    weight = WeightFn(cfg.phi)
    notes = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            if cfg.alpha_list is not None:
                seq = select_alphas(weight, p, alphas=cfg.alpha_list)
            else:
                seq = select_alphas(weight, p, count=cfg.auto_alphas,
                                    max_level=max(cfg.resolution - 1, 2))
            cm = build_counterexample(p, weight, seq, cfg.resolution)
        except ValueError as exc:
            print(f"invalid counterexample spec: {exc}", file=sys.stderr)
            return USAGE
    notes += [str(w.message) for w in caught]
    for note in notes:
        print(f"warning: {note}", file=sys.stderr)
    checks = counterexample_checks(cm)
    verdict = {"alphas": list(seq.alphas), "realized_alphas": list(cm.realized_alphas),
               "excluded_alphas": list(cm.excluded_alphas),
               "lambdas": list(cm.lambdas), "witness": seq.witness,
               "warnings": notes, "exactness": checks}
    status = OK if checks["pass"] else CHECK_FAILED
    if len(cm.realized_alphas) >= 2:
        rep, checkpoints, div = divergence_experiment(cm, cfg.n_max, cfg.threads)
        sweep = [[int(n), float(s), float(w), float(t), float(c)] for n, s, w, t, c in
                 zip(rep.n, rep.strong_norm, rep.weak_norm, rep.term, rep.cumulative)]
        _write_csv(cfg, "sweep.csv", ["n", "strong_norm", "weak_norm", "term", "cumulative"],
                   sweep)
        _write_csv(cfg, "checkpoints.csv",
                   ["k", "alpha", "n_checkpoint", "partial_sum", "weak_floor",
                    "growth_prediction"],
                   [[c["k"], c["alpha"], c["n_checkpoint"], c["partial_sum"],
                     c["weak_floor"], c["growth_prediction"]] for c in checkpoints])
        verdict["checkpoints"] = checkpoints
        verdict["divergence"] = div
        if not div["pass"]:
            status = CHECK_FAILED
    else:
        verdict["divergence"] = None
        verdict["warnings"].append("fewer than 2 realized atoms: divergence experiment skipped")
    verdict["pass"] = status == OK
    _write_json(cfg, "verdict.json", verdict)
    print(f"counterexample alphas={list(cm.realized_alphas)} A={cfg.resolution}: "
          f"{'PASS' if status == OK else 'FAIL'}")
    return status


def run_norms(cfg: RunConfig) -> int:
    try:
        values, tag = gridio.load(cfg.grid)
    except (OSError, ValueError, UnicodeDecodeError) as exc:
        raise UsageError(f"cannot read grid: {exc}")
    out = {"file": cfg.grid, "tag": tag, "dims": values.ndim,
           "resolution": resolution(values), "integral": integrate(values), "norms": {}}
    for p in cfg.p_values:
        if not p > 0:
            raise UsageError("p must be positive")
        entry = {"lp": lp_quasinorm(values, p), "weak_lp": weak_lp_quasinorm(values, p)}
        if values.ndim == 2:
            entry["hp"] = hp_quasinorm(values, p)
        out["norms"][f"{p:g}"] = entry
    if cfg.out:
        _write_json(cfg, "norms.json", out)
    print(json.dumps(out, indent=2, sort_keys=True))
    return OK


RUNNERS = {"kernels": run_kernels, "atom-sweep": run_atom_sweep,
           "counterexample": run_counterexample, "norms": run_norms}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        return RUNNERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return USAGE
    except SystemExit as exc:  # argparse
        return USAGE if exc.code else OK


if __name__ == "__main__":
    sys.exit(main())
