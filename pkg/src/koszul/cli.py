"""Command-line entry point: ``koszul <command> ...``.

Exit codes: 0 success or SATISFIED, 2 property violation, 3 inconclusive,
1 usage or input error.

Polynomial text grammar (``--g``/``--f`` and custom inputs)::

    poly   := term (('+' | '-') term)*
    term   := coeff ['*' monos] | monos
    monos  := var ('*' var)*
    var    := 'z' INDEX ['^' POWER]          (z1 is the first variable)
    coeff  := RATIONAL | '(' gaussian ')'    e.g. 3/4 or (1/2+3/4i)

Several polynomials on the command line are separated by ``;``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .curvature import condition15
from .division import (
    DivergenceEvidence,
    DivisionProblem,
    DivisionWitness,
    NoSolutionAtCap,
    PreconditionError,
    minimal_weighted_witness,
    solve,
    weight_from_json,
)
from .exterior import KoszulElement, multi_indices
from .lemma1 import Lemma1Instance, RankBoundViolation, q_constant, random_instance, rank_oracle, verify_lemma1
from .polyalg import Polynomial, parse_polynomial
from .quadrature import Domain, sample_many
from .triples import (
    cor2_efficiency_bound,
    cor3_constant,
    cor3_D,
    cor3_envelope,
    custom_triple,
    derived,
    make_triple,
    validate,
    validation_grid,
)

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_INCONCLUSIVE = 0, 1, 2, 3

# expression forms of the built-in triples, used as the base for --custom overrides
TRIPLE_EXPRS = {
    "log": {"phi": "eps*log(x)", "F": "0"},
    "exp": {"phi": "0", "F": "-eta*exp(-eps*(x-1))"},
    "combined": {"phi": "eps1*log(x)", "F": "-eps2*exp(-eps3*(x-1))"},
}


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# helpers

def versions() -> dict:
    return {"koszul": __version__, "python": platform.python_version(), "numpy": np.__version__}


def check(name: str, status: str, lhs=None, rhs=None, stderr=None, **details) -> dict:
    return {"name": name, "status": status, "lhs": lhs, "rhs": rhs, "stderr": stderr, "details": details}


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o).__name__}")


def write_json(path, obj):
    text = json.dumps(obj, indent=2, default=_json_default, allow_nan=True)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None


def _read_text_or_inline(value: str) -> tuple[str, str]:
    p = Path(value)
    if p.is_file():
        return p.read_text(encoding="utf-8"), value
    return value, "<inline>"


def load_polys(value: str, n: int | None = None) -> list[Polynomial]:
    """A JSON list of polynomials (objects or strings), or text polynomials split by ';' or lines."""
    text, src = _read_text_or_inline(value)
    stripped = text.strip()
    if stripped.startswith("[") or stripped.startswith("{"):
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InputError(f"{src}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        items = obj if isinstance(obj, list) else [obj]
        out = []
        for i, it in enumerate(items):
            try:
                out.append(Polynomial.from_json(it))
            except ValueError as exc:
                raise InputError(f"{src}: [{i}]: {exc}") from None
        return out
    out = []
    pieces = [(ln, part) for ln, line in enumerate(stripped.splitlines(), 1)
              for part in line.split(";")]
    for ln, part in pieces:
        part = part.strip()
        if not part or part.startswith("#"):
            continue
        try:
            out.append(parse_polynomial(part, n))
        except ValueError as exc:
            raise InputError(f"{src}:{ln}: {exc}") from None
    return out


def _pad(polys: list[Polynomial]) -> list[Polynomial]:
    n = max(q.n for q in polys)
    return [q if q.n == n else Polynomial(n, {e + (0,) * (n - q.n): c for e, c in q.items()}) for q in polys]


def load_f(value: str, p: int, ell: int, n: int) -> KoszulElement:
    """KoszulElement JSON, or text: one polynomial per component in increasing index order."""
    text, src = _read_text_or_inline(value)
    stripped = text.strip()
    if stripped.startswith("{") and '"entries"' in stripped:
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise InputError(f"{src}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
        try:
            return KoszulElement.from_json(obj, n=n)
        except ValueError as exc:
            raise InputError(f"{src}: {exc}") from None
    polys = load_polys(value, n)
    keys = multi_indices(p, ell - 1)
    if len(polys) != len(keys):
        raise InputError(f"{src}: f needs {len(keys)} components for p={p}, ell={ell}, got {len(polys)}")
    return KoszulElement(p, ell - 1, dict(zip(keys, polys)))


def parse_kv(text: str) -> tuple[str, dict]:
    """``t1:tau=2`` or ``triple:kind=log,eps=1`` -> (mode, params)."""
    mode, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        k, sep, v = item.partition("=")
        if not sep:
            raise InputError(f"bad weight parameter {item!r} (want key=value)")
        try:
            params[k.strip()] = float(v)
        except ValueError:
            params[k.strip()] = v.strip()
    return mode.strip(), params


def load_domain(value: str | None, n: int) -> Domain:
    if value is None:
        return Domain.unit_polydisc(n)
    text, src = _read_text_or_inline(value)
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{src}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    try:
        return Domain.from_json(obj)
    except ValueError as exc:
        raise InputError(f"{src}: {exc}") from None


def build_triple(args, q: int):
    if args.custom:
        exprs = dict(TRIPLE_EXPRS.get(args.kind, {"phi": "0", "F": "0"}))
        for item in args.custom:
            k, sep, v = item.partition("=")
            if not sep or k not in ("phi", "F"):
                raise InputError(f"--custom expects phi=EXPR or F=EXPR, got {item!r}")
            exprs[k] = v
        consts = {"eps": args.eps if args.eps is not None else 1.0, "eta": args.eta,
                  "eps1": args.eps1 if args.eps1 is not None else 1.0,
                  "eps2": args.eps2 if args.eps2 is not None else 0.5,
                  "eps3": args.eps3 if args.eps3 is not None else 1.0}
        used = {k: v for k, v in consts.items() if k in exprs["phi"] or k in exprs["F"]}
        try:
            return custom_triple(exprs["phi"], exprs["F"], q, **used)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    if args.kind == "custom":
        raise InputError("--kind custom needs --custom phi=... and/or F=...")
    try:
        return make_triple(args.kind, q=q, eps=args.eps, eps1=args.eps1, eps2=args.eps2,
                           eps3=args.eps3, eta=args.eta)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def emit(args, checks: list, extra: dict | None = None) -> dict:
    config = {k: v for k, v in vars(args).items() if k != "func" and not k.startswith("_")}
    config["argv"] = list(getattr(args, "_argv", []))
    report = {"config": config, "versions": versions(), "checks": checks}
    if extra:
        report.update(extra)
    if getattr(args, "report", None):
        write_json(args.report, report)
    return report


def summarize(checks: list) -> None:
    for c in checks:
        bits = [f"{c['status']:<12} {c['name']}"]
        if c.get("lhs") is not None:
            bits.append(f"lhs={c['lhs']:.6g}")
        if c.get("rhs") is not None:
            bits.append(f"rhs={c['rhs']:.6g}")
        if c.get("stderr") is not None:
            bits.append(f"se={c['stderr']:.3g}")
        print("  ".join(bits))


def _all_pass(checks) -> bool:
    return all(c["status"] in ("PASS", "SATISFIED") for c in checks)


# ---------------------------------------------------------------------------
# commands

def cmd_verify_lemma1(args) -> int:
    s = verify_lemma1(args.seed, args.instances, args.pmax, args.nmax, workers=args.workers)
    js = s.to_json()
    checks = [check(f"lemma1.{k}", "PASS" if n == 0 else "FAIL", violations=n)
              for k, n in js["violation_counts"].items()]
    checks.append(check("lemma1.max_ratio", "PASS" if s.max_ratio <= 1 + 1e-9 else "FAIL",
                        lhs=s.max_ratio, rhs=1.0, checks=s.checks))
    emit(args, checks, {"summary": js})
    summarize(checks)
    print(f"{s.instances} instances, {s.checks} base checks, max lhs/rhs = {s.max_ratio:.9f}")
    if not s.ok:
        for kind, items in s.violations.items():
            for it in items[:5]:
                print(f"violation [{kind}] instance {it['instance_index']} base {it['base']}:")
                print(json.dumps(it["instance"]))
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_check_triple(args) -> int:
    t = build_triple(args, args.q)
    x_min, x_max, pts = args.grid
    rep = validate(t, x_min, x_max, int(pts))
    checks = [check("triple.conditions", "PASS" if rep.valid else "FAIL",
                    first_violation=rep.first_violation, points=rep.points),
              check("triple.derivatives", "PASS" if rep.derivatives_ok else "FAIL",
                    errors=rep.derivative_errors)]
    if rep.valid and not args.custom:
        x = validation_grid(x_min, x_max, int(pts))
        for ell in args.ell:
            w = derived(t, ell, x)
            if args.kind == "log":
                eps = t.params["eps"]
                exact = (1 + eps) * x / eps
                rel = float(np.max(np.abs(w.a_plus_lambda - exact) / exact))
                bound = cor2_efficiency_bound(eps, args.q, ell)
                checks.append(check(f"cor2.a_plus_lambda[ell={ell}]", "PASS" if rel <= 1e-12 else "FAIL",
                                    lhs=rel, rhs=1e-12))
                worst = float(np.max(w.efficiency))
                checks.append(check(f"cor2.efficiency[ell={ell}]",
                                    "PASS" if worst <= bound * (1 + 1e-12) else "FAIL", lhs=worst, rhs=bound))
            elif args.kind == "exp" and t.params.get("eta") == 0.5:
                eps = t.params["eps"]
                worst = float(np.max(w.efficiency))
                bound = 2.0 + args.q * ell
                checks.append(check(f"cor3.efficiency[ell={ell}]",
                                    "PASS" if worst <= bound * (1 + 1e-12) else "FAIL", lhs=worst, rhs=bound))
                ratio = float(np.max(w.a_plus_lambda / cor3_envelope(eps, x)))
                checks.append(check(f"cor3.envelope[ell={ell}]", "PASS" if ratio <= 1 + 1e-12 else "FAIL",
                                    lhs=ratio, rhs=1.0, D=cor3_D(eps),
                                    C=cor3_constant(eps, args.q, ell)))
    emit(args, checks, {"triple": t.describe()})
    summarize(checks)
    if not rep.valid:
        v = rep.first_violation
        print(f"invalid triple: {', '.join(v['conditions'])} fails at x = {v['x']:.12g}")
    return EXIT_OK if _all_pass(checks) else EXIT_VIOLATION


def cmd_derive_weights(args) -> int:
    t = build_triple(args, args.q)
    if args.x_min <= 1 or args.x_max <= args.x_min or args.points < 1:
        raise InputError("need 1 < x-min < x-max and points >= 1")
    x = np.linspace(args.x_min, args.x_max, args.points)
    with np.errstate(all="ignore"):
        w = derived(t, args.ell, x)
    cols = ["x", "a", "b", "lambda", "a_plus_lambda", "efficiency"]
    if args.format == "csv":
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for row in w.rows():
            wr.writerow([repr(float(v)) for v in row])
        text = buf.getvalue()
    else:
        text = json.dumps({"config": {k: v for k, v in vars(args).items()
                                      if k != "func" and not k.startswith("_")},
                           "columns": cols, "rows": [[float(v) for v in r] for r in w.rows()]})
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _problem_from_args(args) -> DivisionProblem:
    if args.problem:
        try:
            prob = DivisionProblem.from_json(read_json(args.problem))
        except ValueError as exc:
            raise InputError(f"{args.problem}: {exc}") from None
        return prob
    if not args.g or not args.f or args.ell is None:
        raise InputError("divide needs --problem, or all of --g, --f and --ell")
    g = _pad(load_polys(args.g))
    if not g:
        raise InputError("--g has no polynomials")
    n = g[0].n
    f = load_f(args.f, len(g), args.ell, n)
    f = f.map(lambda c: c if not isinstance(c, Polynomial) or c.n == n
              else Polynomial(n, {e + (0,) * (n - c.n): v for e, v in c.items()}))
    domain = load_domain(args.domain, n)
    spec = None
    weight = None
    if args.weight:
        mode, params = parse_kv(args.weight)
        spec = {"mode": mode, **params}
        try:
            weight = weight_from_json(spec, q_constant(len(g), n, args.ell), args.ell, n)
        except ValueError as exc:
            raise InputError(f"--weight: {exc}") from None
    try:
        return DivisionProblem(g, f, args.ell, weight, domain, spec)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def cmd_divide(args) -> int:
    prob = _problem_from_args(args)
    cap = args.cap if args.cap is not None else prob.f.max_poly_degree() + 6
    try:
        if args.minimize:
            wit = minimal_weighted_witness(prob, cap, args.samples, args.seed)
        else:
            wit = solve(prob, cap)
    except NoSolutionAtCap as exc:
        checks = [check("divide.solve", "INCONCLUSIVE", cap=cap, message=str(exc))]
        emit(args, checks)
        summarize(checks)
        return EXIT_INCONCLUSIVE
    checks = [check("divide.residual_zero", "PASS" if wit.ok else "FAIL", cap=cap,
                    free_dim=wit.free_dim, info=wit.info)]
    if args.out:
        write_json(args.out, wit.to_json())
    else:
        print(json.dumps(wit.to_json()))
    if args.problem_out:
        write_json(args.problem_out, prob.to_json())
    emit(args, checks)
    summarize(checks)
    print(f"u = {wit.u}")
    return EXIT_OK if wit.ok else EXIT_VIOLATION


def _check15(args, prob: DivisionProblem) -> dict:
    w = prob.weight
    if w is None:
        raise InputError("--check-15 needs a weight in the problem")
    rng = np.random.default_rng([args.seed, 15])
    pts = sample_many(prob.domain, rng, args.points)
    margins, scales = [], []
    for z in pts:
        c = condition15(w, prob.g, z)
        margins.append(c.margin)
        scales.append(c.scale)
        if args.verbose:
            print(f"margin {c.margin:+.6e} scale {c.scale:.3e} at {np.round(z, 6).tolist()}")
    margins, scales = np.array(margins), np.array(scales)
    rel = margins / np.maximum(scales, 1e-300)
    k = int(np.argmin(rel))
    print(f"condition15: min margin {margins[k]:+.6e} (relative {rel[k]:+.3e}) over {len(pts)} points")
    ok = bool(np.all(margins >= -1e-9 * scales))
    return check("estimate.condition15", "PASS" if ok else "FAIL", lhs=float(margins[k]),
                 rhs=float(-1e-9 * scales[k]), points=len(pts), min_relative=float(rel[k]))


def cmd_estimate(args) -> int:
    from .division import verify_estimate

    try:
        prob = DivisionProblem.from_json(read_json(args.problem))
    except ValueError as exc:
        raise InputError(f"{args.problem}: {exc}") from None
    try:
        wit = DivisionWitness.from_json(read_json(args.witness))
    except ValueError as exc:
        raise InputError(f"{args.witness}: {exc}") from None
    if wit.u.p != prob.p or wit.u.degree != prob.ell:
        raise InputError(f"{args.witness}: u must have p={prob.p} and degree {prob.ell}")
    if prob.domain is None:
        prob.domain = Domain.unit_polydisc(prob.n)
    checks = []
    if args.check_15:
        checks.append(_check15(args, prob))
    try:
        r = verify_estimate(prob, wit, args.theorem, args.samples, args.seed, tau=args.tau,
                            eps=args.eps, workers=args.workers)
    except PreconditionError as exc:
        checks.append(check("estimate.precondition", "FAIL", message=str(exc)))
        emit(args, checks)
        summarize(checks)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DivergenceEvidence as exc:
        checks.append(check("estimate.hypothesis_integral", "INCONCLUSIVE", message=str(exc),
                            estimate=exc.estimate.to_json()))
        emit(args, checks)
        summarize(checks)
        return EXIT_INCONCLUSIVE
    except ValueError as exc:
        raise InputError(str(exc)) from None
    checks.append(check(f"estimate.{r.theorem}", r.verdict, lhs=r.lhs.mean, rhs=r.rhs_scaled,
                        stderr=r.diff.stderr, report=r.to_json()))
    emit(args, checks)
    summarize(checks)
    print(f"ratio lhs/(C rhs) = {r.ratio:.6g}, C = {r.constant:.6g}, "
          f"rejected {r.rhs.rejected_fraction:.3%}" + (f", flags: {r.flags}" if r.flags else ""))
    if any(c["status"] == "FAIL" for c in checks) or r.verdict == "VIOLATED":
        return EXIT_VIOLATION
    return EXIT_OK if r.verdict == "SATISFIED" else EXIT_INCONCLUSIVE


def cmd_rank_oracle(args) -> int:
    if args.instance:
        try:
            inst = Lemma1Instance.from_json(read_json(args.instance))
        except ValueError as exc:
            raise InputError(f"{args.instance}: {exc}") from None
    else:
        if not 1 <= args.ell <= args.p:
            raise InputError("need 1 <= ell <= p")
        inst = random_instance(np.random.default_rng(args.seed), args.p, args.n, args.ell)
    checks = []
    status = EXIT_OK
    for base in inst.bases():
        try:
            rank, q = rank_oracle(inst, base)
            checks.append(check(f"rank[{list(base)}]", "PASS", lhs=rank, rhs=q))
        except RankBoundViolation as exc:
            checks.append(check(f"rank[{list(base)}]", "FAIL", message=str(exc)))
            status = EXIT_VIOLATION
        except ValueError as exc:
            raise InputError(str(exc)) from None
    emit(args, checks, {"instance": inst.to_json()})
    summarize(checks)
    if status != EXIT_OK:
        print(json.dumps(inst.to_json()))
    return status


def cmd_selftest(args) -> int:
    from .selftest import run_selftest

    checks = run_selftest(args.seed, quick=args.quick)
    emit(args, checks)
    summarize(checks)
    return EXIT_OK if _all_pass(checks) else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# parser

def _grid(text: str):
    try:
        a, b, n = text.split(",")
        return float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("grid must be XMIN,XMAX,POINTS") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def _triple_args(p):
    p.add_argument("--kind", choices=["log", "exp", "combined", "custom"], default="log")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps1", type=float, default=None)
    p.add_argument("--eps2", type=float, default=None)
    p.add_argument("--eps3", type=float, default=None)
    p.add_argument("--eta", type=float, default=0.5, help="amplitude of the exp triple")
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--custom", action="append", metavar="KEY=EXPR",
                   help="override phi or F with a sympy expression in x (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="koszul", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-lemma1", help="random check of the Koszul inequality and rank bound")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=100_000)
    p.add_argument("--pmax", type=int, default=5)
    p.add_argument("--nmax", type=int, default=4)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report")
    p.set_defaults(func=cmd_verify_lemma1)

    p = sub.add_parser("check-triple", help="validate a Skoda triple on a grid")
    _triple_args(p)
    p.add_argument("--grid", type=_grid, default=(1 + 1e-6, 50.0, 10_000), metavar="XMIN,XMAX,POINTS")
    p.add_argument("--ell", type=_ints, default=[1, 2, 3], help="comma list for the constant checks")
    p.add_argument("--report")
    p.set_defaults(func=cmd_check_triple)

    p = sub.add_parser("derive-weights", help="tabulate a, b, lambda of a triple")
    _triple_args(p)
    p.add_argument("--ell", type=int, default=1)
    p.add_argument("--x-min", type=float, default=1.01)
    p.add_argument("--x-max", type=float, default=10.0)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_derive_weights)

    p = sub.add_parser("divide", help="solve the contraction equation exactly")
    p.add_argument("--problem", help="problem JSON (alternative to --g/--f/--ell)")
    p.add_argument("--g", help="file or inline text/JSON with the p components of g")
    p.add_argument("--f", help="file or inline text/JSON with f")
    p.add_argument("--ell", type=int)
    p.add_argument("--cap", type=int, default=None, help="per-variable exponent cap (default deg f + 6)")
    p.add_argument("--domain", help="domain JSON (default unit polydisc)")
    p.add_argument("--weight", help="e.g. t1:tau=2 or triple:kind=log,eps=1")
    p.add_argument("--minimize", action="store_true")
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--problem-out")
    p.add_argument("--report")
    p.set_defaults(func=cmd_divide)

    p = sub.add_parser("estimate", help="Monte Carlo check of an L2 bound for a witness")
    p.add_argument("--problem", required=True)
    p.add_argument("--witness", required=True)
    p.add_argument("--theorem", choices=["t1", "cor2", "cor3"], required=True)
    p.add_argument("--tau", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--check-15", action="store_true", help="also check the weight's curvature condition")
    p.add_argument("--points", type=int, default=200, help="points for --check-15")
    p.add_argument("--verbose", action="store_true", help="print every --check-15 margin")
    p.add_argument("--report")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("rank-oracle", help="rank of the composed operator against its bound")
    p.add_argument("--instance", help="instance JSON; otherwise a random one")
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--ell", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report")
    p.set_defaults(func=cmd_rank_oracle)

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quick", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_selftest)
    return ap


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    args._argv = argv
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
