"""Command-line front end.

Exit codes: 0 pass, 1 verification failure, 2 usage/config/IO error,
3 enumeration budget exceeded, 4 secret bits exhausted.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

from . import __version__
from .block_codec import DEFAULT_BLOCK_LEN, BlockCodec
from .block_codec import expected_rate as block_rate
from .core import (
    BINARY,
    DEFAULT_BUDGET,
    Alphabet,
    BudgetExceeded,
    ContractViolation,
    FixedBits,
    IIDSource,
    SecretExhausted,
    SeededBits,
    StegoError,
    load_source,
    shannon_entropy,
    subset_entropy,
)
from .pair_codec import PairCodec
from .pair_codec import expected_rate as pair_rate
from . import theorem_lab as lab
from . import verifier

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET, EXIT_SECRET = 0, 1, 2, 3, 4

CODECS = ("pair", "block", "identity", "constant", "swapped-pair", "swapped-block")


class UsageError(StegoError):
    pass


# -- helpers --------------------------------------------------------------------

def parse_int_list(text: str) -> list[int]:
    """'6,8,10' or '10-14' (inclusive) or a mix of both."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def parse_fraction_list(text: str) -> list[Fraction]:
    return [Fraction(p.strip()) for p in text.split(",") if p.strip()]


def make_codec(name: str, alphabet: Alphabet, block_len: int = DEFAULT_BLOCK_LEN):
    if name == "pair":
        return PairCodec(alphabet)
    if name == "block":
        return BlockCodec(alphabet, block_len)
    if name == "identity":
        return verifier.IdentityCodec(alphabet)
    if name == "constant":
        return verifier.ConstantCodec(alphabet)
    if name.startswith("swapped-"):
        return verifier.SwappedDecoder(make_codec(name[len("swapped-"):], alphabet, block_len))
    raise UsageError(f"unknown codec {name!r}")


def atomic_write(path: str | Path, data: str | bytes):
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def manifest(args: argparse.Namespace) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out", "figure")}
    return {"tool": "stegolab", "version": __version__, "command": args.command,
            "config": config, "seed": getattr(args, "seed", None)}


def render(args, result, columns=None, rows=None) -> str:
    """JSON document, or TSV with a '# {manifest}' header line when rows are given."""
    head = manifest(args)
    if args.format == "tsv" and rows is not None:
        lines = ["# " + json.dumps({"manifest": head, "summary": result}, sort_keys=True),
                 "\t".join(columns)]
        lines += ["\t".join("" if v is None else str(v) for v in row) for row in rows]
        return "\n".join(lines) + "\n"
    doc = {"manifest": head, "result": result}
    if rows is not None:
        doc["table"] = {"columns": list(columns), "rows": [list(r) for r in rows]}
    return json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n"


def emit(args, text: str):
    if getattr(args, "out", None):
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


def read_lines(path) -> list[str]:
    text = Path(path).read_text()
    return text.splitlines()


def resolve_alphabet(args) -> Alphabet:
    if getattr(args, "source", None):
        return load_source(args.source).alphabet
    return Alphabet(args.alphabet)


# -- commands -------------------------------------------------------------------

def cmd_embed(args) -> int:
    alphabet = resolve_alphabet(args)
    codec = make_codec(args.codec, alphabet, args.block_len)
    covers = read_lines(args.covertext)
    if args.secret_file:
        secrets = FixedBits("".join(Path(args.secret_file).read_text().split()))
    else:
        secrets = SeededBits(args.seed)
    stego, ts = [], []
    for lineno, x in enumerate(covers, 1):
        try:
            alphabet.check(x, args.n)
        except ValueError as exc:
            raise UsageError(f"{args.covertext}:{lineno}: {exc}") from None
        res = codec.encode(x, secrets)
        stego.append(res.stegotext)
        ts.append(res.t)
    meta = {"lines": len(covers), "t": ts, "bits_consumed": secrets.consumed,
            "secret_mode": "file" if args.secret_file else "seed",
            "prng": None if args.secret_file else "python-random-mt19937"}
    # the sidecar is Alice's local record; t is never part of the channel output
    text = render(args, meta)
    atomic_write(args.out, "".join(s + "\n" for s in stego))
    atomic_write(args.meta or f"{args.out}.meta.json", text)
    return EXIT_OK


def cmd_extract(args) -> int:
    alphabet = resolve_alphabet(args)
    codec = make_codec(args.codec, alphabet, args.block_len)
    out = []
    for lineno, x in enumerate(read_lines(args.stegotext), 1):
        try:
            alphabet.check(x, args.n)
        except ValueError as exc:
            raise UsageError(f"{args.stegotext}:{lineno}: {exc}") from None
        out.append(codec.decode(x) + "\n")
    atomic_write(args.out, "".join(out)) if args.out else sys.stdout.write("".join(out))
    return EXIT_OK


def _require(args, *names):
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} requires {', '.join(missing)}")


def cmd_verify(args) -> int:
    _require(args, "source", "n")
    source = load_source(args.source)
    codec = make_codec(args.codec, source.alphabet, args.block_len)
    if args.trials:
        if not isinstance(source, IIDSource):
            raise UsageError("monte carlo mode needs an i.i.d. source")
        report = verifier.monte_carlo_check(codec, source, args.n, args.trials, args.seed,
                                            threads=args.workers, alpha=args.alpha)
        emit(args, render(args, report.to_dict()))
        return EXIT_FAIL if report.rejected else EXIT_OK
    report = verifier.verify_perfect_security(codec, source, args.n, budget=args.budget,
                                              workers=args.workers)
    d = report.to_dict()
    if args.format == "tsv":
        emit(args, render(args, d, list(d), [list(d.values())]))
    else:
        emit(args, render(args, d))
    return EXIT_OK if report.secure and report.roundtrip_ok else EXIT_FAIL


def cmd_speed(args) -> int:
    _require(args, "source", "n")
    source = load_source(args.source)
    codec = make_codec(args.codec, source.alphabet, args.block_len)
    exact = verifier.measure_speed(codec, source, args.n, budget=args.budget, workers=args.workers)
    closed = None
    if isinstance(source, IIDSource):
        if args.codec == "pair":
            closed = pair_rate(source, args.n)
        elif args.codec == "block" and args.n:
            full = args.n - args.n % args.block_len
            closed = block_rate(source, args.block_len, args.budget) * Fraction(full, args.n)
        elif args.codec in ("identity", "constant"):
            closed = Fraction(0)
        entropy = shannon_entropy(source)
    else:
        entropy = subset_entropy(source) / source.n
    result = {"codec": args.codec, "source": source.describe(), "n": args.n,
              "exact_speed": verifier.fraction_str(exact),
              "closed_form": None if closed is None else verifier.fraction_str(closed),
              "match": None if closed is None else exact == closed,
              "entropy_per_letter": round(entropy, 12)}
    rows = None
    if args.block_lens and isinstance(source, IIDSource):
        rows = [(l, verifier.fraction_str(block_rate(source, l, args.budget)),
                 round(float(block_rate(source, l, args.budget)), 12))
                for l in parse_int_list(args.block_lens)]
        if args.figure:
            from .plotting import plot_rates
            plot_rates([(l, f) for l, _, f in rows], entropy, args.figure)
    emit(args, render(args, result, ("block_len", "rate", "rate_float"), rows))
    return EXIT_FAIL if result["match"] is False else EXIT_OK


def cmd_lab_gamma(args) -> int:
    d = Fraction(args.delta)
    g = lab.gamma(d)
    result = {"delta": str(d), "gamma": f"{g:.6f}", "gamma_full": repr(g)}
    if args.figure:
        from .plotting import plot_gamma
        plot_gamma(args.figure, mark=(float(d), g))
    emit(args, render(args, result))
    return EXIT_OK


def cmd_lab_bounds(args) -> int:
    ns = parse_int_list(args.n_range)
    deltas = parse_fraction_list(args.deltas)
    cols = ("n", "delta", "k", "exact_log2_binom", "entropy_bound", "relative_gap", "method", "min_codewords")
    rows, dict_rows = [], []
    for delta in deltas:
        for n in ns:
            chk = lab.stirling_bound_check(n, delta)
            k = round(Fraction(2**n, 2) * (1 - delta))
            rows.append((n, str(delta), k, f"{chk.exact:.9f}", f"{chk.bound:.9f}",
                         f"{chk.relative_gap:.9e}", lab.log_binomial_method(2**n),
                         lab.min_codeword_count(n, delta)))
            dict_rows.append({"n": n, "delta": str(delta), "relative_gap": chk.relative_gap})
    decreasing = all(
        all(a["relative_gap"] > b["relative_gap"] for a, b in zip(grp, grp[1:]))
        for grp in ([r for r in dict_rows if r["delta"] == str(d)] for d in deltas))
    if args.figure:
        from .plotting import plot_bounds
        plot_bounds(dict_rows, args.figure)
    emit(args, render(args, {"gap_strictly_decreasing": decreasing}, cols, rows))
    return EXIT_OK if decreasing else EXIT_FAIL


def cmd_lab_subset(args) -> int:
    _require(args, "n")
    src = lab.random_subset_source(args.n, args.seed)
    witness = lab.build_pairing_witness(src, Fraction(args.pair_fraction), args.seed)
    report = verifier.verify_perfect_security(witness, src, args.n, budget=args.budget)
    sets = lab.codeword_sets(witness, src.members)
    if args.write_source:
        from .core import format_source
        atomic_write(args.write_source, format_source(src))
    if args.write_table:
        atomic_write(args.write_table, lab.serialize_decode_table(witness, src.members))
    result = report.to_dict()
    result.update({"subset_size": len(src), "pairs": len(witness.pairs), "Z": len(sets.Z),
                   "Z0": len(sets.Z0), "Z1": len(sets.Z1), "entropy": subset_entropy(src)})
    emit(args, render(args, result))
    return EXIT_OK if report.secure and report.roundtrip_ok else EXIT_FAIL


def cmd_lab_closure(args) -> int:
    cols = ("n", "seed", "X", "Z", "Z1", "k0", "sizes", "fixpoint_is_X", "escaped")
    rows, ok = [], True
    for n in parse_int_list(args.n_range):
        for seed in parse_int_list(args.seeds):
            src = lab.random_subset_source(n, seed)
            witness = lab.build_pairing_witness(src, Fraction(args.pair_fraction), seed)
            sets = lab.codeword_sets(witness, src.members)
            res = lab.closure(witness, src.members, src.members - sets.Z1)
            is_x = res.fixpoint == src.members
            ok &= is_x and not res.escaped
            rows.append((n, seed, len(src), len(sets.Z), len(sets.Z1), res.k0,
                         ",".join(map(str, res.sizes)), is_x, len(res.escaped)))
    emit(args, render(args, {"all_fixpoints_equal_X": ok}, cols, rows))
    return EXIT_OK if ok else EXIT_FAIL


def complexity_summary(rows, n_focus=12, window=(1.6, 2.4), min_factor=5.0) -> dict:
    rnd = {}
    for r in rows:
        if r.kind == "random":
            rnd.setdefault(r.seed, {})[r.n] = r.proxy
    structured = {r.n: r.proxy for r in rows if r.kind == "structured"}
    ratios = {seed: [round(by_n[n + 1] / by_n[n], 6) for n in sorted(by_n) if n + 1 in by_n]
              for seed, by_n in rnd.items()}
    in_window = all(window[0] <= q <= window[1] for qs in ratios.values() for q in qs)
    factors = [by_n[n_focus] / structured[n_focus] for by_n in rnd.values()
               if n_focus in by_n and n_focus in structured]
    s_ns = sorted(structured)
    structured_shrinks = all(structured[a] / 2**a > structured[b] / 2**b for a, b in zip(s_ns, s_ns[1:]))
    return {
        "growth_ratios": {str(k): v for k, v in sorted(ratios.items())},
        "growth_window": list(window),
        "growth_in_window": in_window,
        "random_over_structured_at_n": n_focus,
        "random_over_structured": [round(f, 3) for f in factors],
        "factor_ok": bool(factors) and min(factors) >= min_factor,
        "structured_ratio_to_2n_decreasing": structured_shrinks,
        "compressor": lab.ZLIB_PARAMS,
    }


def cmd_lab_complexity(args) -> int:
    ns = parse_int_list(args.n_range)
    seeds = parse_int_list(args.seeds)
    rows = lab.decoder_description_experiment(ns, seeds)
    if args.table_dir:
        Path(args.table_dir).mkdir(parents=True, exist_ok=True)
        for n in ns:
            for seed in seeds:
                src = lab.random_subset_source(n, seed)
                w = lab.build_pairing_witness(src, 1, seed)
                atomic_write(Path(args.table_dir) / f"random_n{n}_seed{seed}.tsv",
                             lab.serialize_decode_table(w, src.members))
    summary = complexity_summary(rows, n_focus=args.focus_n)
    if args.figure:
        from .plotting import plot_complexity
        plot_complexity(rows, args.figure)
    cols = ("n", "kind", "seed", "table_bytes", "proxy_bytes")
    emit(args, render(args, summary, cols, [tuple(r) for r in rows]))
    passed = summary["growth_in_window"] and (summary["factor_ok"] or args.focus_n not in ns)
    return EXIT_OK if passed else EXIT_FAIL


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--codec", choices=CODECS, default="pair")
    common.add_argument("--block-len", type=int, default=DEFAULT_BLOCK_LEN,
                        help="block length for the block codec (default %(default)s)")
    common.add_argument("--source", help="uniformK, inline 'a=2/3,b=1/3', or a source config file")
    common.add_argument("--alphabet", default=str(BINARY), help="symbols when no --source is given")
    common.add_argument("--n", type=int, help="covertext length")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="max strings in an exhaustive enumeration (default 2^26)")
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--workers", type=int, default=1, help="parallel partitions")

    p = argparse.ArgumentParser(prog="stegolab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"stegolab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("embed", parents=[common], help="hide secret bits in covertext lines")
    e.add_argument("--covertext", required=True, help="file with one covertext per line")
    e.add_argument("--secret-file", help="file of 0/1 characters (whitespace ignored)")
    e.add_argument("--meta", help="sidecar metadata path (default <out>.meta.json)")
    e.set_defaults(func=cmd_embed)

    x = sub.add_parser("extract", parents=[common], help="recover bits from stegotext lines")
    x.add_argument("--stegotext", required=True)
    x.set_defaults(func=cmd_extract)

    v = sub.add_parser("verify", parents=[common],
                       help="exact perfect-security check, or Monte Carlo with --trials")
    v.add_argument("--trials", type=int, help="run the chi-square Monte Carlo check instead")
    v.add_argument("--alpha", type=float, default=0.001)
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("speed", parents=[common], help="exact speed E[t]/n and its closed form")
    s.add_argument("--block-lens", help="also tabulate block-codec rates, e.g. 2,4,8,16")
    s.add_argument("--figure", help="PNG of rate vs block length")
    s.set_defaults(func=cmd_speed)

    lab_p = sub.add_parser("lab", help="impossibility-argument experiments")
    lsub = lab_p.add_subparsers(dest="lab_command", required=True)

    g = lsub.add_parser("gamma", parents=[common], help="gamma(delta) = 1 - H2((1-delta)/2)")
    g.add_argument("--delta", required=True)
    g.add_argument("--figure")
    g.set_defaults(func=cmd_lab_gamma)

    b = lsub.add_parser("bounds", parents=[common],
                        help="TSV columns: n delta k exact_log2_binom entropy_bound relative_gap "
                             "method min_codewords")
    b.add_argument("--n-range", default="6,8,10,12")
    b.add_argument("--deltas", default="1/4,1/2,3/4")
    b.add_argument("--figure")
    b.set_defaults(func=cmd_lab_bounds)

    c = lsub.add_parser("closure", parents=[common],
                        help="TSV columns: n seed X Z Z1 k0 sizes fixpoint_is_X escaped")
    c.add_argument("--n-range", default="6,8,10")
    c.add_argument("--seeds", default="0-4")
    c.add_argument("--pair-fraction", default="1")
    c.set_defaults(func=cmd_lab_closure)

    su = lsub.add_parser("subset", parents=[common], help="random subset source + pairing witness")
    su.add_argument("--pair-fraction", default="1")
    su.add_argument("--write-source", help="save the subset as a source config file")
    su.add_argument("--write-table", help="save the serialized decode table")
    su.set_defaults(func=cmd_lab_subset)

    cx = lsub.add_parser("complexity", parents=[common],
                         help="TSV columns: n kind seed table_bytes proxy_bytes (zlib proxy, not K)")
    cx.add_argument("--n-range", default="10-14")
    cx.add_argument("--seeds", default="0-4")
    cx.add_argument("--focus-n", type=int, default=12)
    cx.add_argument("--table-dir", help="write random-X decode tables here")
    cx.add_argument("--figure")
    cx.set_defaults(func=cmd_lab_complexity)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.command == "lab":
        args.command = f"lab {args.lab_command}"
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"stegolab: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ContractViolation as exc:
        print(f"stegolab: contract violation: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except SecretExhausted as exc:
        print(f"stegolab: secret exhausted: {exc}", file=sys.stderr)
        return EXIT_SECRET
    except (StegoError, ValueError, OSError) as exc:
        print(f"stegolab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
