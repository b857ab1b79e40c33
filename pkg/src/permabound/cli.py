"""Command-line interface.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error,
3 size or budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from . import bounds as B
from .convolution import (
    ProductSetFunction,
    SetFunction,
    classify_equality,
    conv_coefficients,
    master_sides,
    pfaff_saalschutz_check,
    probe_general_g,
    product_table,
)
from .core import (
    ColumnPartition,
    IndexSubset,
    ParseError,
    PermaboundError,
    SizeExceededError,
    as_square_matrix,
    load_matrix,
)
from .ensembles import ENSEMBLES, random_partition, sample, trial_rng
from .linforms import (
    classify_coeff_equality,
    coeff_bound,
    coeff_via_permanent,
    expand_product,
    DEFAULT_TERM_BUDGET,
)
from .permanent import BACKEND, default_exact_cap, per_naive, per_ryser

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_SIZE = 0, 1, 2, 3


@dataclass
class CliConfig:
    command: str
    matrix_path: str | None = None
    partition_spec: str | None = None
    blocks_spec: str | None = None
    seed: int = 0
    trials: int = 100
    output: str = "json"
    exact_cap: int = 30
    tolerance: float = 1e-9
    workers: int = 1


# --------------------------------------------------------------------------
# partition specs


def parse_partition(n: int, sizes: str | None = None, blocks: str | None = None) -> ColumnPartition | None:
    """``"1,1,2"`` gives consecutive blocks; ``"1,3|2|4"`` gives explicit 1-based groups."""
    if sizes and blocks:
        raise ParseError("give either --partition or --blocks, not both")
    try:
        if sizes:
            parts = [int(s) for s in sizes.split(",") if s.strip()]
            part = ColumnPartition.consecutive(parts, n)
        elif blocks:
            groups = [[int(c) - 1 for c in g.split(",") if c.strip()] for g in blocks.split("|")]
            if any(c < 0 for g in groups for c in g):
                raise ParseError("column numbers in --blocks start at 1")
            part = ColumnPartition.from_groups(groups, n)
        else:
            return None
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"invalid partition spec: {exc}") from None
    if part.universe.bits != (1 << n) - 1:
        raise ParseError(f"partition must cover all {n} columns")
    return part


def _int_list(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise ParseError(f"expected a comma-separated integer list, got {text!r}") from None


# --------------------------------------------------------------------------
# commands


def cmd_per(cfg: CliConfig, algo: str = "ryser") -> dict:
    z = as_square_matrix(load_matrix(cfg.matrix_path))
    n = z.shape[0]
    if n > cfg.exact_cap:
        raise SizeExceededError(f"n={n} exceeds the exact cap {cfg.exact_cap}")
    start = time.perf_counter()
    if algo == "naive":
        value = per_naive(z)
    else:
        value = per_ryser(z, workers=cfg.workers, cap=cfg.exact_cap)
    elapsed = (time.perf_counter() - start) * 1e3
    return {
        "value_re": value.real,
        "value_im": value.imag,
        "algorithm": algo,
        "backend": BACKEND if algo == "ryser" else "python",
        "n": n,
        "elapsed_ms": elapsed,
    }


def cmd_bound(cfg: CliConfig) -> dict:
    z = as_square_matrix(load_matrix(cfg.matrix_path))
    part = parse_partition(z.shape[0], cfg.partition_spec, cfg.blocks_spec)
    report = B.bound_report(z, part, exact_cap=cfg.exact_cap, tol=cfg.tolerance, workers=cfg.workers)
    return report.to_dict()


def cmd_coeff(cfg: CliConfig, exponent: str) -> dict:
    z = load_matrix(cfg.matrix_path)
    m = _int_list(exponent)
    if len(m) != z.shape[1]:
        raise ParseError(f"exponent has {len(m)} entries, matrix has {z.shape[1]} columns")
    n = z.shape[0]
    if n > cfg.exact_cap:
        raise SizeExceededError(f"n={n} exceeds the exact cap {cfg.exact_cap}")
    c = coeff_via_permanent(z, m)
    bound = coeff_bound(z, m)
    out = {
        "coeff_re": c.real,
        "coeff_im": c.imag,
        "bound": bound,
        "tight": bool(abs(abs(c) - bound) <= cfg.tolerance * (1 + bound)),
        "equality_flags": sorted(classify_coeff_equality(z, m, cfg.tolerance)),
    }
    if comb(n + len(m) - 1, len(m) - 1) <= DEFAULT_TERM_BUDGET and n <= 12:
        e = expand_product(z).coeff(m)
        out["expansion_re"] = e.real
        out["expansion_im"] = e.imag
        out["expansion_agrees"] = bool(abs(e - c) <= 1e-9 * (1 + abs(e)))
    return out


def cmd_identities(cfg: CliConfig, max_n: int = 12, case: str | None = None,
                   xy_range: tuple[int, int] = (-5, 10), pfaff_max: int = 6,
                   random_pairs: int = 100) -> dict:
    cases = []
    failures = 0
    if case:
        vals = _int_list(case)
        if len(vals) != 3 or not 0 <= vals[1] <= vals[0] <= vals[2]:
            raise ParseError(f"--case needs l,m,n with 0 <= m <= l <= n, got {case!r}")
        triples = [tuple(vals)]
    else:
        triples = [(l, m, n) for n in range(1, max_n + 1) for l in range(n + 1) for m in range(l + 1)]
    c1_ok = True
    for l, m, n in triples:
        try:
            co = conv_coefficients(l, m, n)
            ok = True
        except PermaboundError as exc:
            ok, co = False, None
            cases.append({"l": l, "m": m, "n": n, "pass": False, "error": str(exc)})
        if not ok:
            failures += 1
            continue
        if m == 1 and co.C != Fraction(l * (n - l + 1), n):
            c1_ok = False
        if case:
            cases.append({"l": l, "m": m, "n": n, "pass": True, "C": str(co.C),
                          "f": {f"{a},{b}": str(v) for (a, b), v in sorted(co.f.items())}})
    pf_fail = 0
    pf_total = 0
    if not case:
        lo, hi = xy_range
        for x in range(lo, hi + 1):
            for y in range(lo, hi + 1):
                for mm in range(pfaff_max + 1):
                    for nn in range(pfaff_max + 1):
                        pf_total += 1
                        pf_fail += not pfaff_saalschutz_check(x, y, mm, nn).equal
        rng = trial_rng(cfg.seed, 0)
        for _ in range(random_pairs):
            x = Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 13)))
            y = Fraction(int(rng.integers(-40, 41)), int(rng.integers(1, 13)))
            mm, nn = int(rng.integers(0, pfaff_max + 1)), int(rng.integers(0, pfaff_max + 1))
            pf_total += 1
            pf_fail += not pfaff_saalschutz_check(x, y, mm, nn).equal
    failures += pf_fail + (not c1_ok)
    return {
        "coefficient_cases": len(triples),
        "coefficient_failures": sum(1 for c in cases if not c["pass"]),
        "c_l1n_matches": c1_ok,
        "pfaff_saalschutz_cases": pf_total,
        "pfaff_saalschutz_failures": pf_fail,
        "cases": cases,
        "pass": failures == 0,
    }


# ---- verify


INEQUALITIES = ("classic", "partition", "subsum", "step", "master", "coefficient", "bregman_minc")


def _random_nonempty_subset(rng, n: int) -> int:
    return int(rng.integers(1, 1 << n))


def _verify_trial(n: int, ensemble: str, seed: int, t: int) -> dict[str, tuple[float, float]]:
    rng = trial_rng(seed, t)
    out = {}
    part = random_partition(rng, range(n), n)
    z = sample(ensemble, rng, n, part)
    per_abs = abs(per_ryser(z))
    out["classic"] = (per_abs, B.bound_classic(z))
    out["partition"] = (per_abs, B.bound_partition(z, part))

    L = _random_nonempty_subset(rng, n)
    Lp = random_partition(rng, IndexSubset(L, n).indices, n)
    out["subsum"] = (B.subsum_lhs_fast(z, L), B.bound_subsum(z, L, Lp))

    M = 0
    while M == 0:
        M = L & int(rng.integers(1, 1 << n))
    step = B.bound_step(z, L, M)
    out["step"] = (step.lhs, step.rhs)

    l = int(rng.integers(0, n + 1))
    m = int(rng.integers(0, l + 1))
    g = rng.exponential(size=n)
    h = rng.exponential(size=comb(n, l - m))
    lhs, rhs = master_sides(product_table(g, m), h, n, l, m)
    out["master"] = (float(lhs), float(rhs))

    d = int(rng.integers(1, 5))
    if ensemble == "rank-one-phase":
        w = np.outer(np.exp(2j * np.pi * rng.random(n)), rng.uniform(0.5, 2.0, d) + 0j)
    else:
        w = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    expo = rng.multinomial(n, [1.0 / d] * d)
    out["coefficient"] = (abs(coeff_via_permanent(w, expo)), coeff_bound(w, expo))

    b = rng.integers(0, 2, size=(n, n)).astype(np.complex128)
    out["bregman_minc"] = (abs(per_ryser(b)), B.bound_bregman_minc(b))
    return out


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 1.0 if lhs == 0 else math.inf
    return lhs / rhs


def _convolution_extremes(n: int, seed: int, tol: float) -> list[dict]:
    """m = 0 and m = l shapes, where both sides must coincide."""
    rng = trial_rng(seed, 1 << 30)
    rows = []
    for l in range(n + 1):
        for m in sorted({0, l}):
            g = ProductSetFunction(rng.exponential(size=n))
            h = SetFunction(n, l - m, rng.exponential(size=comb(n, l - m)))
            lhs, rhs = master_sides(g.table(m), h.table, n, l, m)
            lhs, rhs = float(lhs), float(rhs)
            rows.append({
                "l": l,
                "m": m,
                "lhs": lhs,
                "rhs": rhs,
                "equal": abs(lhs - rhs) <= tol * (1 + rhs),
                "conditions": sorted(classify_equality(g, h, n, l, m, tol)),
            })
    return rows


def _general_g_probe(n: int, seed: int, trials: int) -> dict:
    worst = 0.0
    for t in range(trials):
        rng = trial_rng(seed, (1 << 31) + t)
        l = int(rng.integers(1, n + 1))
        m = int(rng.integers(1, l + 1))
        gt = rng.exponential(size=comb(n, m))
        ht = rng.exponential(size=comb(n, l - m))
        lhs, rhs = probe_general_g(gt, ht, n, l, m)
        worst = max(worst, _ratio(float(lhs), float(rhs)))
    return {"trials": trials, "max_lhs_over_rhs": worst, "counterexample_found": worst > 1.0}


def cmd_verify(cfg: CliConfig, n: int = 6, ensemble: str = "gaussian-complex",
               probe_general_g: bool = False) -> dict:
    if ensemble not in ENSEMBLES:
        raise ParseError(f"unknown ensemble {ensemble!r}")
    if cfg.trials < 1:
        raise ParseError("--trials must be at least 1")
    if n > min(cfg.exact_cap, 16):
        raise SizeExceededError(f"verify runs exhaustive checks and is limited to n <= 16")

    def run(t):
        return _verify_trial(n, ensemble, cfg.seed, t)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run, range(cfg.trials)))
    else:
        results = [run(t) for t in range(cfg.trials)]

    summary = {}
    violations = 0
    for name in INEQUALITIES:
        ratios = [_ratio(*r[name]) for r in results]
        bad = sum(1 for r in results if r[name][0] > r[name][1] * (1 + cfg.tolerance))
        violations += bad
        summary[name] = {
            "trials": len(ratios),
            "violations": bad,
            "worst_relative_slack": 1.0 - max(ratios),
            "max_tightness": max(ratios),
            "min_tightness": min(ratios),
        }
    out = {
        "n": n,
        "ensemble": ensemble,
        "seed": cfg.seed,
        "trials": cfg.trials,
        "tolerance": cfg.tolerance,
        "inequalities": summary,
        "convolution_extremes": _convolution_extremes(n, cfg.seed, cfg.tolerance),
        "violations": violations,
        "pass": violations == 0,
    }
    if probe_general_g:
        out["general_g_probe"] = _general_g_probe(n, cfg.seed, cfg.trials)
    return out


# ---- bench


def _bench_trial(ensemble: str, n: int, part: ColumnPartition, seed: int, t: int,
                 exact_cap: int, tol: float) -> dict:
    rng = trial_rng(seed, t)
    z = sample(ensemble, rng, n, part)
    per_abs = abs(per_ryser(z)) if n <= exact_cap else None
    values = {"classic": B.bound_classic(z), "partition": B.bound_partition(z, part)}
    if B.corollary_applies(z, part, tol):
        values["corollary"] = B.bound_corollary(z, part, tol=tol)
    if B.is_binary(z):
        values["bregman_minc"] = B.bound_bregman_minc(z)
    gap = values["partition"] ** 2 - values["classic"] ** 2
    scale = values["classic"] ** 2
    w_sign = 0 if abs(gap) <= 1e-12 * scale else (1 if gap > 0 else -1)
    rec = {
        "trial": t,
        "ensemble": ensemble,
        "n": n,
        "per_abs": per_abs,
        "bounds": values,
        "tightness": {k: (_ratio(per_abs, v) if per_abs is not None else None) for k, v in values.items()},
        "w_sign": w_sign,
    }
    if n == 3 and part.sizes == (2, 1) and part.blocks[0].bits == 0b011:
        rec["w"] = B.w_quantity(z)
    return rec


def cmd_bench(cfg: CliConfig, ensemble: str, n: int = 6) -> dict:
    if ensemble not in ENSEMBLES:
        raise ParseError(f"unknown ensemble {ensemble!r}; choose from {', '.join(ENSEMBLES)}")
    part = parse_partition(n, cfg.partition_spec, cfg.blocks_spec)
    if part is None:
        part = ColumnPartition.consecutive([n - n // 2, n // 2] if n > 1 else [1], n)

    def run(t):
        return _bench_trial(ensemble, n, part, cfg.seed, t, cfg.exact_cap, cfg.tolerance)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(run, range(cfg.trials)))
    else:
        records = [run(t) for t in range(cfg.trials)]
    beats = sum(1 for r in records if r["bounds"]["partition"] < r["bounds"]["classic"])
    max_tight = {}
    for r in records:
        for k, v in r["tightness"].items():
            if v is not None:
                max_tight[k] = max(max_tight.get(k, 0.0), v)
    return {
        "ensemble": ensemble,
        "n": n,
        "partition": [list(b.indices) for b in part.blocks],
        "seed": cfg.seed,
        "records": records,
        "summary": {
            "trials": len(records),
            "partition_beats_classic_fraction": beats / len(records) if records else 0.0,
            "max_tightness": max_tight,
            "w_sign_counts": {s: sum(1 for r in records if r["w_sign"] == v)
                              for s, v in (("negative", -1), ("zero", 0), ("positive", 1))},
        },
    }


# --------------------------------------------------------------------------
# output


def _flatten(d, prefix=""):
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            yield from _flatten(v, key + ".")
        elif isinstance(v, list) and v and isinstance(v[0], dict):
            yield key, f"[{len(v)} rows]"
        else:
            yield key, v


def render_table(doc: dict) -> str:
    rows = list(_flatten(doc))
    if "bounds" in doc and isinstance(doc["bounds"], list):
        rows = [(k, v) for k, v in rows if k != "bounds"]
        head = ("name", "value", "log_value", "tightness", "equality_flags")
        table = [head] + [tuple(str(b[h]) for h in head) for b in doc["bounds"]]
        widths = [max(len(r[i]) for r in table) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in table]
        return "\n".join([f"{k}: {v}" for k, v in rows] + lines)
    width = max((len(k) for k, _ in rows), default=0)
    return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows)


def render_csv(records: list[dict]) -> str:
    flat = [dict(_flatten(r)) for r in records]
    fields = []
    for r in flat:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for r in flat:
        writer.writerow(r)
    return buf.getvalue()


def emit(doc: dict, output: str, stream=None) -> None:
    stream = stream or sys.stdout
    if output == "table":
        stream.write(render_table(doc) + "\n")
    elif output == "csv" and "records" in doc:
        stream.write(render_csv(doc["records"]))
    else:
        stream.write(json.dumps(doc, indent=2) + "\n")


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=100)
    common.add_argument("--output", choices=("json", "table", "csv"), default="json")
    common.add_argument("--exact-cap", type=int, default=None,
                        help="largest n for exact permanents (O(2^n n); env PERMABOUND_EXACT_CAP)")
    common.add_argument("--tolerance", type=float, default=1e-9)
    common.add_argument("--workers", type=int, default=1)

    parser = argparse.ArgumentParser(prog="permabound", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("per", parents=[common], help="exact permanent of a square matrix")
    p.add_argument("matrix")
    p.add_argument("--algo", choices=("ryser", "naive"), default="ryser")

    p = sub.add_parser("bound", parents=[common], help="bound report for a square matrix")
    p.add_argument("matrix")
    p.add_argument("--partition", help="consecutive block sizes, e.g. 1,1,2")
    p.add_argument("--blocks", help="explicit 1-based column groups, e.g. '1,3|2|4'")

    p = sub.add_parser("verify", parents=[common], help="seeded sweep over every inequality")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--ensemble", default="gaussian-complex", choices=ENSEMBLES)
    p.add_argument("--probe-general-g", action="store_true",
                   help="experimental: also try non-product g in the mean-square inequality")

    p = sub.add_parser("coeff", parents=[common], help="coefficient of a product of linear forms")
    p.add_argument("matrix")
    p.add_argument("--exponent", required=True, help="m1,...,md summing to the number of rows")

    p = sub.add_parser("identities", parents=[common], help="exact coefficient identity sweep")
    p.add_argument("--max-n", type=int, default=12)
    p.add_argument("--case", help="single l,m,n triple")
    p.add_argument("--pfaff-max", type=int, default=6)
    p.add_argument("--random-pairs", type=int, default=100)

    p = sub.add_parser("bench", parents=[common], help="bound tightness over a random ensemble")
    p.add_argument("--ensemble", required=True)
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--partition")
    p.add_argument("--blocks")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cap = args.exact_cap if args.exact_cap is not None else default_exact_cap()
        cfg = CliConfig(
            command=args.command,
            matrix_path=getattr(args, "matrix", None),
            partition_spec=getattr(args, "partition", None),
            blocks_spec=getattr(args, "blocks", None),
            seed=args.seed,
            trials=args.trials,
            output=args.output,
            exact_cap=cap,
            tolerance=args.tolerance,
            workers=args.workers,
        )
        status = EXIT_OK
        if args.command == "per":
            doc = cmd_per(cfg, args.algo)
        elif args.command == "bound":
            doc = cmd_bound(cfg)
        elif args.command == "coeff":
            doc = cmd_coeff(cfg, args.exponent)
        elif args.command == "identities":
            doc = cmd_identities(cfg, args.max_n, args.case, pfaff_max=args.pfaff_max,
                                 random_pairs=args.random_pairs)
            status = EXIT_OK if doc["pass"] else EXIT_FAIL
        elif args.command == "verify":
            doc = cmd_verify(cfg, args.n, args.ensemble, args.probe_general_g)
            status = EXIT_OK if doc["pass"] else EXIT_FAIL
        else:
            doc = cmd_bench(cfg, args.ensemble, args.n)
    except SizeExceededError as exc:
        print(f"permabound: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except (PermaboundError, OSError) as exc:
        print(f"permabound: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(doc, cfg.output)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
