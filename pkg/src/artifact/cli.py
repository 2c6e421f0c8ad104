"""Command-line driver: verification suites, Hochschild homology, word actions."""
import argparse
import json
import os
import re
import sys

from .exactlin import ring_from_name

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_GUARD = 0, 1, 2, 3


class UsageError(Exception):
    pass


class GuardError(Exception):
    pass


# ---------------------------------------------------------------------------
# loading

def load_algebra(spec, ring):
    from .hochschild import algebra_by_name, algebra_from_json
    if os.path.exists(spec):
        with open(spec) as fh:
            return algebra_from_json(json.load(fh), ring)
    try:
        return algebra_by_name(spec, ring)
    except (KeyError, ValueError) as e:
        raise UsageError(f"unknown algebra {spec!r}") from e


def load_prop(spec):
    from .props import prop_by_name, prop_from_json
    if os.path.exists(spec):
        with open(spec) as fh:
            return prop_from_json(json.load(fh))
    try:
        return prop_by_name(spec)
    except KeyError as e:
        raise UsageError(f"unknown prop {spec!r}") from e


def make_model(prop, A, alg_spec):
    """A P-algebra model for a builtin prop on a catalog algebra."""
    from . import hochschild as H
    name = prop.name.lower()
    try:
        if name == "chopf":
            m = re.fullmatch(r"group:(\d+)", alg_spec)
            if m:
                return H.chopf_group_model(int(m.group(1)), A.ring)
            m = re.fullmatch(r"poly:(\d+)", alg_spec)
            if m and A.ring.p and int(m.group(1)) == A.ring.p - 1:
                return H.chopf_poly_model(A.ring.p)
            raise UsageError("CHopf acts on group:n, or on poly:(p-1) over f<p>")
        if name == "com":
            return H.com_model(A)
        if name == "ass":
            return H.ass_model(A)
        if name == "trivial":
            return H.trivial_model(A)
        if name == "odd":
            return H.odd_model(A)
    except ValueError as e:
        raise UsageError(str(e)) from e
    raise UsageError(f"no model of {prop.name} on {alg_spec}")


# ---------------------------------------------------------------------------
# word expressions

def _ints(s):
    s = s.strip()
    return tuple(int(x) for x in s.split(",") if x.strip()) if s else ()


def parse_word(P, expr):
    """Parse "sh(1,1); m; AW(1,1)" into a WordSum (segments in application order).

    Tokens: sh(v), AW(v), perm(v:chi), theta, h:name, a generator name, a
    composite such as "m.Delta" (applied left to right) or a tuple such as
    "(Delta,Delta)".
    """
    from . import fatten as F
    from .natural import shuffle_nat, aw_nat, perm_nat, NatElement, HANDLES
    tokens = [t.strip() for t in expr.split(";") if t.strip()]
    if not tokens:
        raise UsageError("empty word expression")
    pieces = []
    for tok in tokens:
        m = re.fullmatch(r"(sh|AW|aw)\(([\d,\s]*)\)", tok)
        if m:
            v = _ints(m.group(2))
            x = shuffle_nat(v) if m.group(1) == "sh" else aw_nat(v)
            pieces.append(F.n_word(P, x))
            continue
        m = re.fullmatch(r"perm\(([\d,\s]*):([\d,\s]*)\)", tok)
        if m:
            try:
                pieces.append(F.n_word(P, perm_nat(_ints(m.group(1)), _ints(m.group(2)))))
            except (TypeError, ValueError) as e:
                raise UsageError(f"bad permutation {tok!r}") from e
            continue
        if tok == "theta" or tok.startswith("h:"):
            name = "theta" if tok == "theta" else tok[2:]
            if name == "theta":
                F.theta_handle()
            if name not in HANDLES:
                raise UsageError(f"unknown handle {name!r}")
            pieces.append(F.n_word(P, NatElement.atom(("h", name))))
            continue
        names = tok[1:-1].split(",") if tok.startswith("(") and tok.endswith(")") else [tok]
        names = [n.strip() for n in names]
        try:
            pieces.append(F.gen_word(P, [n.split(".") for n in names]))
        except KeyError as e:
            raise UsageError(f"unknown generator in {tok!r}") from e
    w = pieces[0]
    for p in pieces[1:]:
        if p.source != w.target:
            raise UsageError(f"shape mismatch: {w.target} then {p.source}")
        w = F.word_compose(p, w)
    return w


# ---------------------------------------------------------------------------
# output

def _fmt(ring, x):
    return ring.to_str(x)


def render(report, fmt):
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    lines = [f"# {report['command']}", ""]
    for k, v in report.get("config", {}).items():
        lines.append(f"- {k}: {v}")
    lines.append("")
    if "checks" in report:
        lines.append("| suite | check | params | verdict |")
        lines.append("|---|---|---|---|")
        for r in report["checks"]:
            params = ", ".join(f"{k}={v}" for k, v in r["params"].items())
            row = (r["suite"], r["check"], params, r["verdict"])
            lines.append("| " + " | ".join(x.replace("|", "\\|") for x in row) + " |")
        if "seconds" in report:
            lines.append("")
            for k, v in report["seconds"].items():
                lines.append(f"- {k}: {v} s")
    if "homology" in report:
        lines.append("| n | rank | torsion |")
        lines.append("|---|---|---|")
        for row in report["homology"]:
            lines.append(f"| {row['n']} | {row['rank']} | {row['torsion']} |")
    if "matrices" in report:
        lines.append(f"word: {report['word']}")
        lines.append("")
        for n, m in report["matrices"].items():
            lines.append(f"degree {n}: {m['rows']}x{m['cols']}")
            for r in m["dense"]:
                lines.append("  " + " ".join(r))
    if "verdict" in report:
        lines.append("")
        lines.append(f"verdict: {report['verdict']}")
    return "\n".join(lines) + "\n"


def emit(report, args):
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands

def cmd_verify(args):
    from .verify import RunConfig, run_suite
    from .natural import GuardExceeded
    cfg = RunConfig(ring=args.ring, max_degree=args.max_degree, word_bound=args.word_bound,
                    seed=args.seed, timings=args.timings)
    try:
        records, seconds = run_suite(args.suite, cfg)
    except KeyError:
        raise UsageError(f"unknown suite {args.suite!r}")
    except GuardExceeded as e:
        report = {"command": f"verify {args.suite}", "config": _config(args),
                  "checks": [], "verdict": "guard-exceeded", "reason": str(e)}
        emit(report, args)
        return EXIT_GUARD
    ok = all(r["verdict"] != "fail" for r in records)
    report = {"command": f"verify {args.suite}", "config": _config(args), "checks": records,
              "verdict": "pass" if ok else "fail"}
    if args.timings:
        report["seconds"] = seconds
    emit(report, args)
    if not ok:
        return EXIT_FAIL
    if any(r["verdict"] == "skipped" for r in records):
        return EXIT_GUARD
    return EXIT_PASS


def cmd_hh(args):
    from .hochschild import hh_ranks
    ring = ring_from_name(args.ring)
    A = load_algebra(args.algebra, ring)
    if args.max_degree > 6:
        raise GuardError("hh is limited to --max-degree <= 6")
    h = hh_ranks(A, args.max_degree)
    rows = [{"n": n, "rank": h[n].rank, "torsion": list(h[n].torsion)} for n in sorted(h)]
    report = {"command": f"hh {args.algebra}", "config": _config(args), "homology": rows}
    emit(report, args)
    return EXIT_PASS


def cmd_act(args):
    from . import fatten as F
    ring = ring_from_name(args.ring)
    P = load_prop(args.prop)
    A = load_algebra(args.algebra, ring)
    model = make_model(P, A, args.algebra)
    w = parse_word(P, args.word)
    if args.max_degree > 4:
        raise GuardError("act is limited to --max-degree <= 4")
    f = F.act(w, model, args.max_degree)
    mats = {}
    for n in range(0, args.max_degree + 1):
        M = f.matrix(n)
        dense = [[_fmt(ring, x) for x in row] for row in M.to_dense()]
        mats[str(n)] = {"rows": M.rows, "cols": M.cols, "dense": dense}
    report = {"command": f"act {args.prop} {args.word!r} {args.algebra}",
              "config": _config(args), "word": F.describe(w), "degree": w.degree,
              "matrices": mats}
    emit(report, args)
    return EXIT_PASS


def _config(args):
    keys = ("ring", "max_degree", "word_bound", "seed")
    return {k: getattr(args, k) for k in keys if hasattr(args, k)}


def build_parser():
    p = argparse.ArgumentParser(prog="artifact",
                                description="Hochschild complexes and fattened props.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ring", default="q", help="q, z or f<p>")
    common.add_argument("--max-degree", type=int, default=3)
    common.add_argument("--word-bound", type=int, default=4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=("json", "md"), default="md")
    sub = p.add_subparsers(dest="command", required=True)
    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", help="dold-kan | bcy | natural | fatten | chopf | all")
    v.add_argument("--timings", action="store_true", help="include timings")
    v.set_defaults(func=cmd_verify)
    h = sub.add_parser("hh", parents=[common], help="Hochschild homology ranks")
    h.add_argument("algebra", help="builtin name or JSON file")
    h.set_defaults(func=cmd_hh)
    a = sub.add_parser("act", parents=[common], help="matrices of a word action")
    a.add_argument("prop")
    a.add_argument("word")
    a.add_argument("algebra")
    a.set_defaults(func=cmd_act)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        ring_from_name(args.ring)
        if args.max_degree < 0 or args.word_bound < 0:
            raise UsageError("--max-degree and --word-bound must be >= 0")
        return args.func(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except GuardError as e:
        print(f"guard exceeded: {e}", file=sys.stderr)
        return EXIT_GUARD
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def entry():
    sys.exit(main())
