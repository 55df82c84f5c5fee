"""Problem files: a YAML (or JSON) tree describing one analysis.

::

    variables: {state: [y], time: t, wiener: [w]}
    sde: {calculus: ito, drift: ["..."], noise: [["..."]]}
    symmetry: {phi: ["exp(-y)"], random: false}
    change: {forward: ["x = exp(y)"], inverse: ["y = log(x)"], domain: {y: [0.3, 2]}}
    tau: {expr: "t^2"}
    numeric: {seed: 0, paths: 200, dt: ["2^-6", "2^-8"], horizon: 1, domain: {}, tol: 1e-9}

Only ``variables`` and ``sde`` are required.  A JSON report written by the
command line embeds its problem under ``problem`` and loads back as is.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ValidationError
from .expr import DEFAULT_DOMAINS, VarSpace, ZeroTestConfig, eval_numeric, parse
from .kozlov import NEW_NAME_CHOICES
from .sde_model import _SDE, make_sde
from .symmetry import TauCandidate, VectorField
from .transform import CoordinateChange

SECTIONS = ("variables", "sde", "symmetry", "change", "tau", "numeric")
NUMERIC_KEYS = ("seed", "paths", "dt", "horizon", "domain", "tol", "samples", "x0", "epsilon")
DEFAULT_DT = tuple(2.0**-k for k in range(6, 13))


@dataclass(frozen=True)
class NumericSettings:
    seed: int = 0
    paths: int = 200
    dt: tuple = DEFAULT_DT
    horizon: float = 1.0
    domain: dict = field(default_factory=dict)
    tol: float = 1e-9
    samples: int = 32
    x0: tuple | None = None
    epsilon: float = 1e-2

    def zero_config(self) -> ZeroTestConfig:
        return ZeroTestConfig(self.tol, self.samples, self.seed, DEFAULT_DOMAINS.merged(self.domain))


@dataclass(frozen=True)
class Problem:
    raw: dict
    space: VarSpace
    sde: _SDE
    field: VectorField | None
    change: CoordinateChange | None
    tau: TauCandidate | None
    numeric: NumericSettings

    def require(self, section: str):
        value = {"symmetry": self.field, "change": self.change, "tau": self.tau}[section]
        if value is None:
            raise ValidationError(f"this command needs a '{section}' block")
        return value


def _number(v) -> float:
    if isinstance(v, bool):
        raise ValidationError(f"expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return float(v)
    if isinstance(v, str):
        return eval_numeric(parse(v, ()), {})
    raise ValidationError(f"expected a number, got {v!r}")


def _strings(v, what: str) -> list[str]:
    if isinstance(v, (str, int, float)):
        v = [v]
    if not isinstance(v, list):
        raise ValidationError(f"{what} must be a list of expressions")
    return [str(x) for x in v]


def _intervals(v, what: str) -> dict:
    if v is None:
        return {}
    if not isinstance(v, dict):
        raise ValidationError(f"{what} must map names to [lo, hi]")
    out = {}
    for k, iv in v.items():
        if not isinstance(iv, (list, tuple)) or len(iv) != 2:
            raise ValidationError(f"{what}.{k} must be [lo, hi]")
        lo, hi = _number(iv[0]), _number(iv[1])
        if not lo < hi:
            raise ValidationError(f"{what}.{k}: empty interval [{lo}, {hi}]")
        out[str(k)] = (lo, hi)
    return out


def _space(v) -> VarSpace:
    if not isinstance(v, dict) or "state" not in v:
        raise ValidationError("variables.state is required")
    state = v["state"]
    state = [state] if isinstance(state, str) else list(state)
    wiener = v.get("wiener", ["w"])
    wiener = [wiener] if isinstance(wiener, str) else list(wiener)
    try:
        return VarSpace(tuple(state), str(v.get("time", "t")), tuple(wiener))
    except ValueError as exc:
        raise ValidationError(f"variables: {exc}") from exc


def _split_named(entries: list[str]) -> tuple[list[str | None], list[str]]:
    names, exprs = [], []
    for s in entries:
        lhs, eq, rhs = s.partition("=")
        if eq and lhs.strip().isidentifier():
            names.append(lhs.strip())
            exprs.append(rhs)
        else:
            names.append(None)
            exprs.append(s)
    return names, exprs


def _change(v, sp: VarSpace, domain: dict) -> CoordinateChange:
    if "forward" not in v or "inverse" not in v:
        raise ValidationError("change needs both 'forward' and 'inverse'")
    new, fwd = _split_named(_strings(v["forward"], "change.forward"))
    lhs, inv = _split_named(_strings(v["inverse"], "change.inverse"))
    if any(n is not None and n not in sp.state for n in lhs):
        raise ValidationError("inverse entries must be written 'old = expression'")
    if len(new) != sp.n:
        raise ValidationError(f"change.forward needs {sp.n} entries")
    used = set(sp.all_names) | {n for n in new if n}
    pool = NEW_NAME_CHOICES + tuple(f"x{k}" for k in range(1, 100))
    for i, n in enumerate(new):
        if n is None:
            new[i] = next(c for c in pool if c not in used)
            used.add(new[i])
    cd = _intervals(v.get("domain"), "change.domain")
    old = {k: iv for k, iv in cd.items() if k in sp.state}
    nd = {k: iv for k, iv in cd.items() if k in new}
    base = DEFAULT_DOMAINS.merged(domain)
    return CoordinateChange(sp, tuple(new), tuple(fwd), tuple(inv), base.merged(old), base.merged(nd) if nd else None)


def _numeric(v) -> NumericSettings:
    v = v or {}
    unknown = set(v) - set(NUMERIC_KEYS)
    if unknown:
        raise ValidationError(f"unknown numeric keys: {sorted(unknown)}")
    kw = {}
    if "seed" in v:
        kw["seed"] = int(v["seed"])
    if "paths" in v:
        kw["paths"] = int(v["paths"])
    if "samples" in v:
        kw["samples"] = int(v["samples"])
    if "dt" in v:
        kw["dt"] = tuple(_number(d) for d in (v["dt"] if isinstance(v["dt"], list) else [v["dt"]]))
    for key in ("horizon", "tol", "epsilon"):
        if key in v:
            kw[key] = _number(v[key])
    if "domain" in v:
        kw["domain"] = _intervals(v["domain"], "numeric.domain")
    if "x0" in v and v["x0"] is not None:
        x0 = v["x0"] if isinstance(v["x0"], list) else [v["x0"]]
        kw["x0"] = tuple(_number(x) for x in x0)
    return NumericSettings(**kw)


def build_problem(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ValidationError("a problem file must be a mapping")
    if "problem" in data and "command" in data:
        data = data["problem"]
    unknown = set(data) - set(SECTIONS)
    if unknown:
        raise ValidationError(f"unknown sections: {sorted(unknown)}")
    for req in ("variables", "sde"):
        if req not in data:
            raise ValidationError(f"missing section '{req}'")
    raw = copy.deepcopy(data)
    sp = _space(data["variables"])
    s = data["sde"]
    if "drift" not in s or "noise" not in s:
        raise ValidationError("sde needs 'drift' and 'noise'")
    noise = s["noise"]
    if not isinstance(noise, list) or not all(isinstance(r, list) for r in noise):
        raise ValidationError("sde.noise must be a list of rows")
    drift = _strings(s["drift"], "sde.drift")
    sde = make_sde(sp, drift, [[str(e) for e in row] for row in noise], str(s.get("calculus", "ito")))
    num = _numeric(data.get("numeric"))
    X = None
    if data.get("symmetry"):
        sym = data["symmetry"]
        if "phi" not in sym:
            raise ValidationError("symmetry needs 'phi'")
        kind = "random" if sym.get("random", False) else "deterministic"
        X = VectorField(sp, tuple(_strings(sym["phi"], "symmetry.phi")), kind)
    ch = _change(data["change"], sp, num.domain) if data.get("change") else None
    tau = None
    if data.get("tau"):
        if "expr" not in data["tau"]:
            raise ValidationError("tau needs 'expr'")
        tau = TauCandidate(parse(str(data["tau"]["expr"]), sp))
    return Problem(raw, sp, sde, X, ch, tau, num)


def load_problem(path: str | Path) -> Problem:
    p = Path(path)
    if not p.is_file():
        raise ValidationError(f"no such problem file: {p}")
    try:
        data = yaml.safe_load(p.read_text())
    except yaml.YAMLError as exc:
        raise ValidationError(f"{p}: {exc}") from exc
    return build_problem(data)
