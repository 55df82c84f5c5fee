"""Command line driver: ``stochsym <command> <problem-file> [flags]``.

Exit codes: 0 positive verdict, 1 negative verdict, 2 invalid input,
3 missing capability (no integration rule, no closed-form inverse, ...).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace

from . import __version__
from .errors import (
    CapabilityError,
    ConstraintNotSatisfied,
    SymmetryNotPreserved,
    SymmetryPreconditionError,
    ValidationError,
)
from .expr import Add, ExprSyntaxError, Neg, SamplingExhausted, UnknownIdentifierError, eval_numeric, is_zero, simplify
from .kozlov import explicit_solution, reduce_scalar
from .mc_verify import change_consistency_test
from .problem import Problem, load_problem
from .sde_model import ItoSDE, as_ito, ito_to_stratonovich, rho, stratonovich_to_ito
from .symmetry import (
    check_symmetry,
    combine_verdicts,
    constrained_laplacian,
    determining_system,
    sigma_operator,
    tau_condition_expressions,
    unal_differences,
    verify_unal_identity,
)
from .transform import transform, verify_symmetry_preserved

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_CAPABILITY = 0, 1, 2, 3
COMMANDS = ("convert", "check", "determining", "reduce", "solve", "verify-change", "tau-check", "unal")


@dataclass
class Report:
    command: str
    problem: Problem | None = None
    sections: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)
    verdict: str = ""
    exit_code: int = EXIT_OK

    def add(self, section: str, line: str) -> None:
        self.sections.setdefault(section, []).append(line)

    def text(self) -> str:
        out = []
        for name in ("INPUT", "RESIDUALS", "VERDICT", "NUMERIC"):
            if name in self.sections:
                out.append(f"== {name} ==")
                out.extend("  " + ln for block in self.sections[name] for ln in block.splitlines())
        return "\n".join(out)

    def as_json(self) -> dict:
        return {
            "command": self.command,
            "version": __version__,
            "exit_code": self.exit_code,
            "verdict": self.verdict,
            "problem": self.problem.raw if self.problem else None,
            "sections": self.sections,
            "result": self.result,
        }


def _verdict_json(v) -> dict:
    d = {"zero": v.is_zero, "method": v.method, "detail": v.describe()}
    if hasattr(v, "witness"):
        d["witness"] = v.witness
        d["value"] = v.value
    return d


def _zero(e, cfg, p: Problem):
    return is_zero(e, cfg.domains, cfg.tol, cfg.samples, cfg.seed, p.space.state + (p.space.time,))


def _residual_block(rep: Report, items, verdicts: dict) -> None:
    rep.result["residuals"] = {}
    for label, e in items:
        v = verdicts[label]
        rep.add("RESIDUALS", f"{label}: {e}  ->  {v.describe()}")
        rep.result["residuals"][label] = {"expr": str(e), **_verdict_json(v)}


def _input_block(rep: Report, p: Problem) -> None:
    rep.add("INPUT", f"{p.sde.calculus} equation:")
    rep.add("INPUT", p.sde.describe())
    if p.field is not None:
        rep.add("INPUT", f"field ({p.field.kind}): {p.field.describe()}")
    if p.change is not None:
        rep.add("INPUT", f"change: {p.change.describe()}")
    if p.tau is not None:
        rep.add("INPUT", f"tau: {p.tau.tau}")


def _symmetry_verdict(rep: Report, report, prefix: str = "symmetry") -> bool:
    if report.is_symmetry:
        how = "symbolic" if report.all_symbolic else "numeric"
        rep.add("VERDICT", f"{prefix}: yes ({how})")
        return True
    label, v = report.first_failure()
    rep.add("VERDICT", f"{prefix}: no ({label} {v.describe()})")
    return False


# ------------------------------------------------------------ commands


def cmd_convert(p: Problem, rep: Report) -> None:
    cfg = p.numeric.zero_config()
    if isinstance(p.sde, ItoSDE):
        out = ito_to_stratonovich(p.sde)
        back = stratonovich_to_ito(out)
    else:
        out = stratonovich_to_ito(p.sde)
        back = ito_to_stratonovich(out)
    items = [
        (f"round-trip drift[{x}]", simplify(Add((back.drift[i], Neg(p.sde.drift[i])))))
        for i, x in enumerate(p.space.state)
    ]
    verdicts = {label: _zero(e, cfg, p) for label, e in items}
    _residual_block(rep, items, verdicts)
    rep.add("VERDICT", f"{out.calculus} form:")
    rep.add("VERDICT", out.describe())
    rep.result["converted"] = {
        "calculus": out.calculus,
        "drift": [str(simplify(e)) for e in out.drift],
        "noise": [[str(simplify(e)) for e in row] for row in out.noise],
    }
    ok = all(v.is_zero for v in verdicts.values())
    rep.verdict = "converted" if ok else "round trip failed"
    rep.exit_code = EXIT_OK if ok else EXIT_NEGATIVE


def cmd_check(p: Problem, rep: Report) -> None:
    X = p.require("symmetry")
    report = check_symmetry(p.sde, X, p.numeric.zero_config())
    _residual_block(rep, report.system.items(), report.verdicts)
    ok = _symmetry_verdict(rep, report)
    rep.verdict = report.overall
    rep.exit_code = EXIT_OK if ok else EXIT_NEGATIVE


def cmd_determining(p: Problem, rep: Report) -> None:
    X = p.require("symmetry")
    system = determining_system(p.sde, X)
    rep.result["residuals"] = {}
    for label, e in system.items():
        rep.add("RESIDUALS", f"{label}: {e}")
        rep.result["residuals"][label] = {"expr": str(e)}
    rep.add("VERDICT", f"{len(system)} {system.calculus} determining equations")
    rep.verdict = "emitted"


def _reduce(p: Problem, rep: Report):
    X = p.require("symmetry")
    cfg = p.numeric.zero_config()
    red = reduce_scalar(as_ito(p.sde), X, cfg)
    ch = red.provenance
    rep.add("RESIDUALS", f"symmetry residuals vanish; change {ch.describe()}")
    x = ch.new_state[0]
    rep.add("VERDICT", f"reduced: d{x} = ({red.drift_t}) d{red.time} + ({red.noise_t}) d{p.space.wiener[0]}")
    rep.add("VERDICT", f"drift: {red.drift_t}")
    rep.add("VERDICT", f"noise: {red.noise_t}")
    rep.result.update(
        {
            "new_state": x,
            "forward": str(ch.forward[0]),
            "inverse": str(ch.inverse[0]),
            "drift": str(red.drift_t),
            "noise": str(red.noise_t),
        }
    )
    rep.verdict = "reduced"
    return red


def cmd_reduce(p: Problem, rep: Report) -> None:
    _reduce(p, rep)


def cmd_solve(p: Problem, rep: Report) -> None:
    red = _reduce(p, rep)
    ch = red.provenance
    y = p.space.state[0]
    y0 = p.numeric.x0[0] if p.numeric.x0 else sum(ch.old_domains().interval(y)) / 2
    x0 = eval_numeric(ch.forward[0], {y: y0, p.space.time: 0.0})
    sol = explicit_solution(red, x0, 0.0)
    x = ch.new_state[0]
    w = p.space.wiener[0]
    rep.add("VERDICT", f"{x}(t) = {sol.formula(w)}   ({x}(0) = {x0:.12g} from {y}(0) = {y0:.12g})")
    rep.add("VERDICT", f"{y}(t) = {ch.inverse[0]} evaluated at {x}(t)")
    T = p.numeric.horizon
    rep.add("NUMERIC", f"law of {x}({T:g}): Gaussian, mean {sol.mean(T):.12g}, variance {sol.var(T):.12g}")
    rep.result.update(
        {
            "x0": x0,
            "solution": sol.formula(w),
            "drift_integral": None if sol.drift_integral is None else str(sol.drift_integral),
            "variance": None if sol.variance is None else str(sol.variance),
            "mean_at_horizon": sol.mean(T),
            "variance_at_horizon": sol.var(T),
        }
    )
    rep.verdict = "solved"


def cmd_verify_change(p: Problem, rep: Report, numeric: bool = True) -> None:
    ch = p.require("change")
    cfg = p.numeric.zero_config()
    ch.validate(cfg)
    rep.add("RESIDUALS", "composition identities: zero on the validity domain")
    new = transform(p.sde, ch, cfg)
    rep.add("VERDICT", "transformed equation:")
    rep.add("VERDICT", new.describe())
    rep.result["transformed"] = {
        "drift": [str(e) for e in new.drift],
        "noise": [[str(e) for e in row] for row in new.noise],
    }
    ok = True
    if p.field is not None:
        before, after = verify_symmetry_preserved(as_ito(p.sde), p.field, ch, cfg)
        for tag, r in (("before", before), ("after", after)):
            for label, v in r.verdicts.items():
                rep.add("RESIDUALS", f"{tag} {label}: {v.describe()}")
        rep.add("VERDICT", "symmetry preserved: yes")
    if numeric:
        nm = p.numeric
        r = change_consistency_test(as_ito(p.sde), ch, nm.dt, nm.paths, nm.seed, nm.x0, nm.horizon, nm.domain or None)
        rep.add("NUMERIC", r.table())
        rep.add("NUMERIC", r.summary())
        rep.result["numeric"] = {
            "dt": list(r.dts),
            "discrepancy": list(r.discrepancies),
            "slope": r.slope,
            "monotone": r.monotone,
            "excluded": r.excluded,
            "paths": r.paths,
            "passed": r.passed,
        }
        ok = r.passed
    rep.verdict = "consistent" if ok else "inconsistent"
    rep.exit_code = EXIT_OK if ok else EXIT_NEGATIVE


def cmd_tau_check(p: Problem, rep: Report) -> None:
    tau = p.require("tau")
    cfg = p.numeric.zero_config()
    exprs = tau_condition_expressions(p.sde, tau)
    verdicts = {f"tau[{x}]": _zero(e, cfg, p) for x, e in zip(p.space.state, exprs)}
    _residual_block(rep, zip(verdicts, exprs), verdicts)
    v = combine_verdicts(verdicts.values())
    rep.add("VERDICT", f"tau condition: {'satisfied' if v.is_zero else 'violated'} ({v.describe()})")
    rep.verdict = "satisfied" if v.is_zero else "violated"
    rep.exit_code = EXIT_OK if v.is_zero else EXIT_NEGATIVE


def cmd_unal(p: Problem, rep: Report) -> None:
    X = p.require("symmetry")
    cfg = p.numeric.zero_config()
    sde = as_ito(p.sde)
    v = verify_unal_identity(sde, X, cfg)
    lap, sig = constrained_laplacian(sde, X), sigma_operator(X, rho(sde))
    for x, a, b, d in zip(p.space.state, lap, sig, unal_differences(sde, X)):
        rep.add("RESIDUALS", f"laplacian[{x}]: {a}")
        rep.add("RESIDUALS", f"sigma[{x}]: {b}")
        rep.add("RESIDUALS", f"difference[{x}]: {d}")
    rep.add("VERDICT", f"identity: {'holds' if v.is_zero else 'fails'} ({v.describe()})")
    rep.result["verdict"] = _verdict_json(v)
    rep.verdict = "holds" if v.is_zero else "fails"
    rep.exit_code = EXIT_OK if v.is_zero else EXIT_NEGATIVE


HANDLERS = {
    "convert": cmd_convert,
    "check": cmd_check,
    "determining": cmd_determining,
    "reduce": cmd_reduce,
    "solve": cmd_solve,
    "verify-change": cmd_verify_change,
    "tau-check": cmd_tau_check,
    "unal": cmd_unal,
}


# ------------------------------------------------------------ entry point


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stochsym", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("problem", help="YAML or JSON problem file (or a JSON report)")
    ap.add_argument("--seed", type=int, help="seed for zero testing and simulation")
    ap.add_argument("--tol", type=float, help="zero-test tolerance")
    ap.add_argument("--samples", type=int, help="zero-test sample count (>= 32)")
    ap.add_argument("--json", metavar="PATH", help="also write a machine-readable report")
    ap.add_argument("--quiet", action="store_true", help="suppress the text report")
    ap.add_argument("--no-numeric", action="store_true", help="skip Monte Carlo checks in verify-change")
    return ap


def _apply_overrides(p: Problem, args) -> Problem:
    over = {k: getattr(args, k) for k in ("seed", "tol", "samples") if getattr(args, k) is not None}
    if not over:
        return p
    raw = dict(p.raw)
    raw["numeric"] = {**(raw.get("numeric") or {}), **over}
    return replace(p, raw=raw, numeric=replace(p.numeric, **over))


def run(argv=None, stdout=None) -> tuple[int, Report]:
    args = build_parser().parse_args(argv)
    stdout = stdout or sys.stdout
    rep = Report(args.command)
    try:
        p = _apply_overrides(load_problem(args.problem), args)
        p.numeric.zero_config()
        rep.problem = p
        _input_block(rep, p)
        if args.command == "verify-change":
            cmd_verify_change(p, rep, numeric=not args.no_numeric)
        else:
            HANDLERS[args.command](p, rep)
    except (SymmetryPreconditionError, SymmetryNotPreserved) as exc:
        rep.exit_code, rep.verdict = EXIT_NEGATIVE, "not symmetry"
        rep.add("VERDICT", f"symmetry: no ({exc})")
        for source in (getattr(exc, "report", None), getattr(exc, "after", None)):
            if source is not None:
                failure = source.first_failure()
                if failure:
                    label, v = failure
                    expr = dict(source.system.items())[label]
                    rep.add("RESIDUALS", f"{label}: {expr}  ->  {v.describe()}")
                    rep.result["witness"] = {"residual": label, "expr": str(expr), **_verdict_json(v)}
    except (CapabilityError, SamplingExhausted) as exc:
        rep.exit_code, rep.verdict = EXIT_CAPABILITY, "capability"
        rep.add("VERDICT", f"capability error: {exc}")
    except (ValidationError, ConstraintNotSatisfied, ExprSyntaxError, UnknownIdentifierError, ValueError) as exc:
        rep.exit_code, rep.verdict = EXIT_INPUT, "invalid input"
        rep.add("VERDICT", f"input error: {exc}")
    if not args.quiet:
        print(rep.text(), file=stdout)
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rep.as_json(), fh, indent=2, default=str)
    return rep.exit_code, rep


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
