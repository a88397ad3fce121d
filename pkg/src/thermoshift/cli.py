"""Command-line entry point: ``thermoshift <command> --spec FILE``."""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import pressure as pr
from .errors import BudgetExceeded, NumericError, ParseError, ThermoshiftError, ValidationError
from .induced import enumerate_return_words, transfer_counts
from .problem import Problem
from .sft import word_str
from .spectral import bernoulli, markov_entropy, parry_measure

COMMANDS = ("entropy", "parry", "returns", "lambda", "transition", "pressure-curve", "check")
CSV_HEADER = "t,pressure,xi,phase,lambda_residual,truncation_len,tail_bound"

TOP_FIELDS = {"alphabet_size", "transition", "forbidden_blocks", "cylinder", "potential", "options"}
POTENTIAL_FIELDS = {"A", "N"}
DEFAULT_OPTIONS = {
    "tol": 1e-12,
    "max_len": 30,
    "budget": None,
    "cutoff": pr.DEFAULT_CUTOFF,
    "t_min": 0.0,
    "t_max": 5.0,
    "t_step": 0.05,
}


@dataclass
class ProblemSpec:
    alphabet_size: int
    cylinder: str
    A: float
    N: int
    transition: list | None = None
    forbidden_blocks: list | None = None
    options: dict = field(default_factory=lambda: dict(DEFAULT_OPTIONS))

    def build(self) -> Problem:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return Problem.build(self.alphabet_size, self.cylinder, self.A, self.N,
                                 transition=self.transition, forbidden_blocks=self.forbidden_blocks)


def _locate(text: str, key: str):
    """1-based line and column of the first occurrence of a quoted key."""
    pos = text.find(f'"{key}"')
    if pos < 0:
        return None, None
    line = text.count("\n", 0, pos) + 1
    return line, pos - (text.rfind("\n", 0, pos) + 1) + 1


def _fail(text: str, key: str, message: str):
    line, col = _locate(text, key)
    raise ParseError(message, line, col)


def parse_spec(text: str) -> ProblemSpec:
    """Parse and validate a JSON problem description."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(raw, dict):
        raise ParseError("top level must be an object", 1, 1)
    for key in raw:
        if key not in TOP_FIELDS:
            _fail(text, key, f"unknown field {key!r}")
    for key in ("alphabet_size", "cylinder", "potential"):
        if key not in raw:
            raise ParseError(f"missing field {key!r}", 1, 1)
    if "transition" not in raw and "forbidden_blocks" not in raw:
        raise ParseError("need 'transition' or 'forbidden_blocks'", 1, 1)
    m = raw["alphabet_size"]
    if not isinstance(m, int) or isinstance(m, bool):
        _fail(text, "alphabet_size", "alphabet_size must be an integer")
    cyl = raw["cylinder"]
    if not isinstance(cyl, str):
        _fail(text, "cylinder", "cylinder must be a string")
    pot = raw["potential"]
    if not isinstance(pot, dict):
        _fail(text, "potential", "potential must be an object")
    for key in pot:
        if key not in POTENTIAL_FIELDS:
            _fail(text, key, f"unknown potential field {key!r}")
    if set(pot) != POTENTIAL_FIELDS:
        _fail(text, "potential", "potential needs both 'A' and 'N'")
    if not isinstance(pot["A"], (int, float)) or isinstance(pot["A"], bool):
        _fail(text, "A", "A must be a number")
    if not isinstance(pot["N"], int) or isinstance(pot["N"], bool):
        _fail(text, "N", "N must be an integer")
    options = dict(DEFAULT_OPTIONS)
    for key, value in raw.get("options", {}).items():
        if key not in DEFAULT_OPTIONS:
            _fail(text, key, f"unknown option {key!r}")
        options[key] = value
    spec = ProblemSpec(m, cyl, float(pot["A"]), pot["N"], raw.get("transition"),
                       raw.get("forbidden_blocks"), options)
    spec.build()
    return spec


def load_spec(path: str) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def fmt(x) -> str:
    """Fixed 12-significant-digit lower-case scientific notation."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.11e}"


def t_grid(t_min: float, t_max: float, t_step: float) -> list[float]:
    if t_step <= 0 or t_max < t_min:
        raise ValidationError("t grid needs t_step > 0 and t_max >= t_min")
    count = int(math.floor((t_max - t_min) / t_step + 1e-9)) + 1
    return [round(t_min + i * t_step, 12) for i in range(count)]


def curve_csv(curve: pr.PressureCurve) -> str:
    out = io.StringIO(newline="")
    out.write(CSV_HEADER + "\n")
    for p in curve.points:
        row = [fmt(p.t), fmt(p.pressure), fmt(curve.xi), p.phase, fmt(p.residual),
               fmt(p.value.truncation_len), fmt(p.value.tail_bound)]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def _header(spec: ProblemSpec, problem: Problem) -> list[str]:
    opts = " ".join(f"{k}={spec.options[k]}" for k in sorted(spec.options))
    return [
        f"# alphabet_size={spec.alphabet_size} cylinder={spec.cylinder} A={fmt(spec.A)} N={spec.N}",
        f"# forbidden_blocks={','.join(word_str(b) for b in problem.spec.forbidden_blocks())}",
        f"# options {opts}",
    ]


def _cmd_entropy(problem, spec, args, out):
    out.append(f"entropy {fmt(problem.xi)}")
    out.append(f"eta {fmt(problem.eta)}")


def _cmd_parry(problem, spec, args, out):
    mu = parry_measure(problem.spec)
    out.append("stationary " + " ".join(fmt(x) for x in mu.stationary))
    for i, row in enumerate(mu.stochastic):
        out.append(f"row {i} " + " ".join(fmt(x) for x in row))
    out.append(f"entropy {fmt(markov_entropy(mu))}")


def _cmd_returns(problem, spec, args, out):
    max_len = args.max_len or 6
    words = enumerate_return_words(problem.spec, problem.cylinder, max_len, problem.params,
                                   spec.options["budget"])
    by_len = {n: [] for n in range(1, max_len + 1)}
    for rw in words:
        by_len[len(rw)].append(rw)
    out.append("length,count,T1,T2,T3,accidents")
    for n, group in by_len.items():
        types = Counter(rw.word_type for rw in group)
        acc = Counter(len(rw.accidents) for rw in group)
        hist = ";".join(f"{k}:{acc[k]}" for k in sorted(acc))
        out.append(f"{n},{len(group)},{types['T1']},{types['T2']},{types['T3']},{hist}")


def _cmd_lambda(problem, spec, args, out):
    if args.t is None:
        raise ValidationError("lambda needs --t")
    z = problem.xi if args.z is None else args.z
    max_len = args.max_len or spec.options["max_len"]
    rows = [("resolvent", pr.lambda_value(problem, args.t, z, spec.options["cutoff"]))]
    rows.append(("direct", pr.lambda_direct(problem, args.t, z, max_len, spec.options["budget"])))
    if problem.single_block:
        rows.append(("grouped", pr.lambda_grouped(problem, args.t, z, max_len)))
    out.append(f"t {fmt(args.t)} z {fmt(z)}")
    out.append("method,lower,upper,truncation_len,tail_bound")
    for name, v in rows:
        out.append(f"{name},{fmt(v.lower)},{fmt(v.upper)},{v.truncation_len},{fmt(v.tail_bound)}")


def _cmd_transition(problem, spec, args, out):
    tp = pr.find_t_c(problem, tol=max(args.tol or 1e-8, 1e-14), cutoff=spec.options["cutoff"])
    out.append(f"t_c {fmt(tp.t_c)}")
    out.append(f"bracket {fmt(tp.bracket[0])} {fmt(tp.bracket[1])}")
    out.append(f"residual {fmt(tp.residual)}")


def _grid(spec, args):
    opts = spec.options
    lo = opts["t_min"] if args.t_min is None else args.t_min
    hi = opts["t_max"] if args.t_max is None else args.t_max
    step = opts["t_step"] if args.t_step is None else args.t_step
    return t_grid(lo, hi, step)


def _cmd_pressure_curve(problem, spec, args, out):
    tol = args.tol or spec.options["tol"]
    curve = pr.pressure_curve(problem, _grid(spec, args), tol=tol, cutoff=spec.options["cutoff"])
    text = curve_csv(curve)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        out.append(f"t_c {fmt(curve.t_c)}")
        out.append(f"rows {len(curve.points)} written to {args.out}")
    else:
        out.append(text.rstrip("\n"))


def run_checks(problem: Problem, max_len: int = 20):
    """Invariant suite on one problem: list of (name, passed, detail)."""
    results = []

    def record(name, fn):
        try:
            ok, detail = fn()
        except ThermoshiftError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        results.append((name, bool(ok), detail))

    def parry():
        mu = parry_measure(problem.spec)
        gap = abs(markov_entropy(mu) - problem.xi)
        res = float(np.abs(mu.stationary @ mu.stochastic - mu.stationary).max())
        return gap < 1e-8 and res < 1e-10, f"entropy gap {fmt(gap)} stationarity {fmt(res)}"

    def counts():
        if not problem.single_block:
            return True, "skipped (several forbidden blocks)"
        r = transfer_counts(problem.spec, problem.cylinder, max_len)
        words = enumerate_return_words(problem.spec, problem.cylinder, max_len)
        got = Counter(len(w) for w in words)
        bad = [n for n in r if r[n] != got.get(n, 0)]
        return not bad, f"mismatch at {bad}" if bad else f"n <= {max_len} agree"

    def renewal():
        v = pr.lambda_value(problem, 0.0, math.log(problem.m))
        return v.contains(1.0) or abs(v.mid - 1) < 1e-9, f"lambda_0,log m in [{fmt(v.lower)}, {fmt(v.upper)}]"

    def series():
        z = problem.xi
        a = pr.lambda_value(problem, 2.0, z)
        b = pr.lambda_direct(problem, 2.0, z, max_len)
        return a.intersects(b), f"resolvent [{fmt(a.lower)}, {fmt(a.upper)}] direct [{fmt(b.lower)}, {fmt(b.upper)}]"

    state = {}

    def transition():
        tp = pr.find_t_c(problem)
        state["tp"] = tp
        return tp.t_c > 1 and tp.residual < 1e-8, f"t_c {fmt(tp.t_c)} residual {fmt(tp.residual)}"

    def curve():
        c = pr.pressure_curve(problem, t_grid(0.0, 5.0, 0.05), transition=state.get("tp"))
        state["curve"] = c
        return True, f"{len(c.points)} points, P(0) {fmt(c.points[0].pressure)}"

    def sandwich():
        for t in (2.0, 3.0, 5.0):
            pr.sandwich_check(problem, t)
        return True, "t in {2, 3, 5}"

    def variational():
        tp = state.get("tp") or pr.find_t_c(problem)
        t = 2 * tp.t_c
        res = pr.variational_probe(problem, t, [parry_measure(problem.spec),
                                                bernoulli(np.ones(problem.m))], t_c=tp.t_c)
        return True, f"parry gap {fmt(res[0].gap)} at t={fmt(t)}"

    record("parry", parry)
    record("return-counts", counts)
    record("renewal", renewal)
    record("series-consistency", series)
    record("transition", transition)
    record("pressure-curve", curve)
    record("sandwich", sandwich)
    record("variational", variational)
    return results


def _cmd_check(problem, spec, args, out):
    results = run_checks(problem, min(args.max_len or 16, 20))
    for name, ok, detail in results:
        out.append(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    if not all(ok for _, ok, _ in results):
        raise NumericError("one or more checks failed")


HANDLERS = {
    "entropy": _cmd_entropy,
    "parry": _cmd_parry,
    "returns": _cmd_returns,
    "lambda": _cmd_lambda,
    "transition": _cmd_transition,
    "pressure-curve": _cmd_pressure_curve,
    "check": _cmd_check,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thermoshift",
                                 description="Freezing phase transitions of the distance potential on SFTs")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--spec", required=True, help="JSON problem file")
    ap.add_argument("--out", help="output file (pressure-curve CSV)")
    ap.add_argument("--t", type=float)
    ap.add_argument("--z", type=float)
    ap.add_argument("--max-len", type=int)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--t-min", type=float)
    ap.add_argument("--t-max", type=float)
    ap.add_argument("--t-step", type=float)
    return ap


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    args = build_parser().parse_args(argv)
    lines: list[str] = []
    try:
        spec = load_spec(args.spec)
        problem = spec.build()
        if not (args.command == "pressure-curve" and not args.out):
            lines.extend(_header(spec, problem))
        HANDLERS[args.command](problem, spec, args, lines)
        code = 0
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        code = 1
    except NumericError as exc:
        print(f"numeric error: {exc}", file=stderr)
        code = 2
    except BudgetExceeded as exc:
        print(f"budget exhausted: {exc}", file=stderr)
        code = 3
    if lines:
        stdout.write("\n".join(lines) + "\n")
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
