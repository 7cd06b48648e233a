"""Command-line front end: ``shiftlab <subcommand> [options]``.

Every subcommand produces a table and a summary.  The table is printed as
CSV (``--format csv``, the default) or the summary as JSON (``--format
json``); with ``--out DIR`` both are also written to ``DIR/<cmd>.csv`` and
``DIR/<cmd>_summary.json``.  Floats carry 17 significant digits, so
identical inputs give identical bytes regardless of ``--threads``.

CSV columns
-----------
entropy       n, log_count, estimate
ea            index, seed, survived, first_failure, censored
limit         seed, checkpoint, L_N, ratio, censored
cantor        k, n_k, m_k_or_d_k, t_k_or_l_k, r_k, N_k, stretch_end, log_mass, local_dim, local_dim_min
dims          kind, tau, a, b, tag, value, relative
correlations  n, correlation, abs_correlation, theta_pow_n

Exit codes: 0 ok, 1 other failure, 2 malformed input, 3 matrix not
primitive, 4 word length cap exceeded, 5 empty regime.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import cantor, dimensions, gibbs, hitting
from .errors import (
    EmptyRegime,
    InsufficientWordLength,
    InvalidPair,
    InvalidSft,
    NotPrimitive,
    ShiftlabError,
    SymbolOutOfRange,
)
from .io import csv_text, dumps, fmt_float, load_sft, svg_curve
from .sft import count_words, entropy, format_word, specification_gap

EXIT_MALFORMED = 2
EXIT_NOT_PRIMITIVE = 3
EXIT_WORD_LENGTH = 4
EXIT_EMPTY = 5


class UsageError(Exception):
    pass


def _float(text: str) -> float:
    t = str(text).strip().lower()
    if t in ("inf", "infinity", "+inf"):
        return math.inf
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _float_list(text: str) -> list:
    return [_float(x) for x in str(text).split(",") if x.strip()]


def _int_list(text: str) -> list:
    try:
        return [int(float(x)) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="shiftlab",
        allow_abbrev=False,
        description="Subshift run-length statistics, Gibbs measures and Cantor constructions.",
        epilog="CSV columns" + __doc__.split("CSV columns", 1)[1],
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--sft", help="SFT JSON file or a name: golden-mean, full2, full3")
    p.add_argument("--out", help="output directory")
    p.add_argument("--seed", type=int, help="master seed (u64)")
    p.add_argument("--threads", type=int, help="worker threads (default $SHIFTLAB_THREADS)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--manifest", help="JSON manifest providing defaults for the run")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("entropy", help="entropy, Perron data and word-count estimates")
    s.add_argument("--n-max", type=int, default=40)

    def psi_args(sp):
        sp.add_argument("--family", choices=[f.value for f in hitting.Family])
        sp.add_argument("--c", type=float)
        sp.add_argument("--tau", type=_float)
        sp.add_argument("--s", type=float)
        sp.add_argument("--table", help="JSON list of [N, Phi] pairs")

    s = sub.add_parser("ea", help="eventually-always-hitting survivor fraction")
    psi_args(s)
    s.add_argument("--count", type=int, help="number of seeds")
    s.add_argument("--N0", type=int)
    s.add_argument("--N1", type=int)
    s.add_argument("--optimistic", action="store_true")

    s = sub.add_parser("limit", help="L_N / log_A N at checkpoints")
    s.add_argument("--count", type=int)
    s.add_argument("--N", type=int)
    s.add_argument("--checkpoints", type=_int_list)
    s.add_argument("--svg", action="store_true", help="also write the median ratio curve")

    s = sub.add_parser("cantor", help="Cantor construction report and sample point")
    s.add_argument("--variant", choices=[v.value for v in cantor.Variant])
    s.add_argument("--a", type=_float)
    s.add_argument("--b", type=_float)
    psi_args(s)
    s.add_argument("--P", type=int)
    s.add_argument("--k0", type=int)
    s.add_argument("--n1", type=int)
    s.add_argument("--n0", type=int)
    s.add_argument("--depth-budget", type=int)
    s.add_argument("--sample", type=int, help="write a sample point prefix of this length")

    s = sub.add_parser("dims", help="dimension formulas on a parameter grid")
    s.add_argument("--tau", type=_float_list, help="comma list (inf allowed)")
    s.add_argument("--a", type=_float_list)
    s.add_argument("--b", type=_float_list)
    s.add_argument("--row", action="append", default=None, help="explicit a,b,tau row (repeatable)")
    s.add_argument("--ua", type=_float_list, help="a values for the liminf-only sets")

    s = sub.add_parser("correlations", help="exact correlation decay of two cylinders")
    s.add_argument("--e", default=None)
    s.add_argument("--f", default=None)
    s.add_argument("--n-max", type=int, default=30)
    return p


def _merge_manifest(args) -> dict:
    if not args.manifest:
        return {}
    try:
        data = json.loads(Path(args.manifest).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read manifest {args.manifest!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("manifest must be a JSON object")
    return data


def _opt(args, manifest, name, default=None, key=None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    return manifest.get(key or name, default)


def _sft_from(args, manifest):
    source = args.sft
    if source is None:
        source = manifest.get("sft")
    if source is None:
        raise UsageError("no SFT given (use --sft or a manifest 'sft' entry)")
    if isinstance(source, dict):
        from .sft import Sft

        return Sft.from_dict(source)
    return load_sft(source)


def _psi_from(args, manifest, h):
    data = dict(manifest.get("psi") or {})
    if getattr(args, "family", None):
        data = {"family": args.family}
    for key, attr in (("c", "c"), ("tau", "tau"), ("s", "s")):
        v = getattr(args, attr, None)
        if v is not None:
            data[key] = v
    if getattr(args, "table", None):
        data["table"] = json.loads(args.table)
    if "family" not in data:
        raise UsageError("no target function given (--family or manifest 'psi')")
    try:
        return hitting.TargetFunction.from_dict(data, entropy=h)
    except (KeyError, TypeError) as exc:
        raise UsageError(f"target function {data} is missing a parameter: {exc}") from None


def _seeds(args, manifest, default_count):
    seeds = manifest.get("seeds") or {}
    master = args.seed if args.seed is not None else seeds.get("master", 0)
    count = getattr(args, "count", None) or seeds.get("count", default_count)
    if not 0 <= int(master) < 2**64:
        raise UsageError("--seed must be a u64")
    return int(master), int(count), gibbs.seed_list(int(master), int(count))


# -- subcommands -----------------------------------------------------------


def cmd_entropy(args, manifest):
    sft = _sft_from(args, manifest)
    measure = gibbs.parry_measure(sft)
    h = entropy(sft)
    rows = []
    for n in range(1, args.n_max + 1):
        wc = count_words(sft, n)
        rows.append((n, wc.log, wc.log / n))
    summary = {
        "entropy": h,
        "lambda": measure.lam,
        "theta": measure.theta,
        "M": specification_gap(sft),
        "dim_H": dimensions.hausdorff_dimension(sft),
        "measure": measure.to_dict(),
    }
    return ["n", "log_count", "estimate"], rows, summary, {}


def cmd_ea(args, manifest):
    sft = _sft_from(args, manifest)
    measure = gibbs.parry_measure(sft)
    psi = _psi_from(args, manifest, measure.entropy)
    master, count, seeds = _seeds(args, manifest, 100)
    N0 = int(_opt(args, manifest, "N0", 1000))
    N1 = int(_opt(args, manifest, "N1", 100000))
    try:
        res = hitting.dichotomy_experiment(
            sft, measure, psi, seeds, N0, N1, threads=args.threads, optimistic=args.optimistic
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [
        (i, s, r.survived, r.first_failure, r.censored) for i, (s, r) in enumerate(zip(seeds, res.reports))
    ]
    summary = {
        "psi": psi.to_dict(),
        "seeds": {"master": master, "count": count},
        "N0": N0,
        "N1": N1,
        "survivors": int(sum(r.survived for r in res.reports)),
        "fraction": res.fraction,
    }
    return ["index", "seed", "survived", "first_failure", "censored"], rows, summary, {}


def cmd_limit(args, manifest):
    sft = _sft_from(args, manifest)
    measure = gibbs.parry_measure(sft)
    master, count, seeds = _seeds(args, manifest, 100)
    N = int(_opt(args, manifest, "N", 10**6))
    cps = _opt(args, manifest, "checkpoints", None) or hitting.geometric_checkpoints(10, N, 10.0)
    if any(c < 2 for c in cps):
        raise UsageError("checkpoints must be >= 2 (log_A 1 = 0)")
    if any(c > N for c in cps):
        raise UsageError("checkpoints must not exceed N")
    res = hitting.limit_ratio_experiment(sft, measure, seeds, N, cps, threads=args.threads)
    rows = []
    for i, s in enumerate(seeds):
        for j, c in enumerate(res.checkpoints):
            rows.append((s, int(c), int(res.L[i, j]), float(res.ratio[i, j]), False))
    per_cp = []
    for j, c in enumerate(res.checkpoints):
        per_cp.append({"checkpoint": int(c), **{k: float(v[j]) for k, v in res.summary.items()}})
    summary = {
        "seeds": {"master": master, "count": count},
        "N": N,
        "entropy": measure.entropy,
        "checkpoints": per_cp,
    }
    extra = {}
    if args.svg:
        extra["limit.svg"] = svg_curve(
            np.log10(res.checkpoints), res.summary["median"], "log10 N", "median L_N / log_A N", "limit ratio"
        )
    return ["seed", "checkpoint", "L_N", "ratio", "censored"], rows, summary, extra


def cmd_cantor(args, manifest):
    sft = _sft_from(args, manifest)
    variant = cantor.Variant(_opt(args, manifest, "variant", "SECTION4"))
    a = float(_opt(args, manifest, "a", 0.0))
    b = float(_opt(args, manifest, "b", 0.0))
    budget = int(_opt(args, manifest, "depth_budget", 10**6))
    header = [
        "k", "n_k", "m_k_or_d_k", "t_k_or_l_k", "r_k", "N_k", "stretch_end", "log_mass", "local_dim", "local_dim_min",
    ]
    if variant is cantor.Variant.SECTION4:
        tau = args.tau if args.tau is not None else 1.0
        if a > b:
            raise UsageError(f"a={a} exceeds b={b}")
        dim = dimensions.dim_level_set(a, b, tau, sft)
        if dim.tag is dimensions.Regime.EMPTY:
            bound = a / (1 - tau * a) if tau * a < 1 else math.inf
            raise EmptyRegime(
                f"empty regime: b < a/(1-tau a) ({fmt_float(b)} < {fmt_float(bound)}) for tau={fmt_float(tau)}"
            )
        if a == 0 and b == 0:
            summary = {
                "variant": variant.value,
                "params": {"a": a, "b": b, "tau": tau},
                "levels": [],
                "target_dim": dim.value,
                "dimension": dim.to_dict(),
            }
            return header, [], summary, {}
        seq = cantor.build_sequences(
            variant, sft, a=a, b=b, k0=_opt(args, manifest, "k0"), n1=_opt(args, manifest, "n1"), depth_budget=budget
        )
    else:
        psi = _psi_from(args, manifest, entropy(sft))
        seq = cantor.build_sequences(
            variant,
            sft,
            psi=psi,
            a=a,
            b=b,
            P=int(_opt(args, manifest, "P", 3)),
            n0=_opt(args, manifest, "n0"),
            depth_budget=budget,
        )
        dim = dimensions.dim_level_set(a, b, 0.0, sft)
    report = cantor.construction_report(seq)
    report["dimension"] = dim.to_dict()
    rows = [
        (
            lv["k"], lv["n_k"], lv["m_k_or_d_k"], lv["t_k_or_l_k"], lv["r_k"], lv["N_k"], lv["stretch_end"],
            lv["log_mass"], lv["local_dim"], lv["local_dim_min"],
        )
        for lv in report["levels"]
    ]
    extra = {}
    length = _opt(args, manifest, "sample")
    if length:
        master = args.seed if args.seed is not None else (manifest.get("seeds") or {}).get("master", 0)
        point = cantor.sample_point(seq, gibbs.derive_seed(master, 0), int(length))
        text = format_word(point, sft.m)
        extra["point.txt"] = (text if isinstance(text, str) else " ".join(map(str, text))) + "\n"
        runs = hitting.run_lengths(point)
        trace = []
        M = seq.gap
        for lev in seq.levels:
            for N in (lev.N, lev.N + 2 * M + 1):
                if N <= runs.horizon:
                    L, cens = runs.at(N)
                    trace.append((N, L, L / float(seq.phi(N)), cens))
        extra["trace.csv"] = csv_text(["N", "L_N", "ratio", "censored"], trace)
        report["sample"] = {"length": int(length), "seed_master": int(master)}
    return header, rows, report, extra


def _dims_row(kind, a, b, tau, sft):
    if kind == "hea":
        v = dimensions.dim_hea(tau, sft)
    elif kind == "ua":
        v = dimensions.dim_u_a(a, sft)
    else:
        v = dimensions.dim_level_set(a, b, tau, sft)
    cell = lambda x: "" if x is None else x
    return (kind, cell(tau), cell(a), cell(b), v.tag.value, cell(v.value), cell(v.relative))


def cmd_dims(args, manifest):
    sft = _sft_from(args, manifest)
    rows = []
    grid = manifest.get("grid") or {}
    taus = args.tau if args.tau is not None else grid.get("tau")
    as_ = args.a if args.a is not None else grid.get("a")
    bs = args.b if args.b is not None else grid.get("b")
    explicit = args.row if args.row is not None else manifest.get("rows")
    ua = args.ua if args.ua is not None else grid.get("ua")
    if explicit:
        for row in explicit:
            vals = _float_list(row) if isinstance(row, str) else [_float(x) for x in row]
            if len(vals) != 3:
                raise UsageError(f"row {row!r} must be a,b,tau")
            a, b, tau = vals
            if a > b:
                raise UsageError(f"row {row!r}: a={a} exceeds b={b}")
            rows.append(_dims_row("level", a, b, tau, sft))
    if taus is not None and as_ is None and bs is None:
        for tau in taus:
            rows.append(_dims_row("hea", None, None, _float(tau), sft))
    elif as_ is not None or bs is not None:
        taus = taus if taus is not None else [1.0]
        for tau in taus:
            for a in as_ or [0.0]:
                for b in bs or [_float("inf")]:
                    if a > b:
                        continue
                    rows.append(_dims_row("level", _float(a), _float(b), _float(tau), sft))
    if ua is not None:
        for a in ua:
            rows.append(_dims_row("ua", _float(a), None, None, sft))
    if not rows:
        raise UsageError("no grid given (--tau, --a/--b, --row or --ua)")
    summary = {"dim_H": dimensions.hausdorff_dimension(sft), "rows": len(rows)}
    return ["kind", "tau", "a", "b", "tag", "value", "relative"], rows, summary, {}


def cmd_correlations(args, manifest):
    sft = _sft_from(args, manifest)
    measure = gibbs.parry_measure(sft)
    e = args.e if args.e is not None else manifest.get("e", "0")
    f = args.f if args.f is not None else manifest.get("f", "0")
    from .sft import as_word

    n_min = as_word(e).size
    rows = []
    for n in range(n_min, args.n_max + 1):
        c = gibbs.correlation(measure, e, f, n)
        rows.append((n, c, abs(c), measure.theta**n))
    summary = {"e": e, "f": f, "theta": measure.theta, "log_theta": math.log(measure.theta) if measure.theta else None}
    return ["n", "correlation", "abs_correlation", "theta_pow_n"], rows, summary, {}


COMMANDS = {
    "entropy": cmd_entropy,
    "ea": cmd_ea,
    "limit": cmd_limit,
    "cantor": cmd_cantor,
    "dims": cmd_dims,
    "correlations": cmd_correlations,
}


def _emit(args, name, header, rows, summary, extra):
    table = csv_text(header, rows)
    summary_text = dumps(summary)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{name}.csv").write_text(table)
        (out / f"{name}_summary.json").write_text(summary_text)
        for fname, text in extra.items():
            (out / fname).write_text(text)
    sys.stdout.write(summary_text if args.format == "json" else table)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None and args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        manifest = _merge_manifest(args)
        header, rows, summary, extra = COMMANDS[args.command](args, manifest)
        _emit(args, args.command, header, rows, summary, extra)
        return 0
    except NotPrimitive as exc:
        print(f"shiftlab: not primitive: {exc}", file=sys.stderr)
        return EXIT_NOT_PRIMITIVE
    except (InvalidSft, SymbolOutOfRange) as exc:
        print(f"shiftlab: invalid SFT: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except InsufficientWordLength as exc:
        print(f"shiftlab: word length cap exceeded: {exc}", file=sys.stderr)
        return EXIT_WORD_LENGTH
    except EmptyRegime as exc:
        print(f"shiftlab: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (UsageError, InvalidPair, ValueError) as exc:
        print(f"shiftlab: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except ShiftlabError as exc:
        print(f"shiftlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
