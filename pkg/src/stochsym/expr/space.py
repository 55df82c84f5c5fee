from __future__ import annotations

from dataclasses import dataclass, field

from .nodes import FUNCTIONS


@dataclass(frozen=True)
class VarSpace:
    """Names of the state variables, the time variable and the Wiener variables."""

    state: tuple[str, ...]
    time: str = "t"
    wiener: tuple[str, ...] = ("w",)

    def __post_init__(self) -> None:
        object.__setattr__(self, "state", tuple(self.state))
        object.__setattr__(self, "wiener", tuple(self.wiener))
        if not self.state:
            raise ValueError("at least one state variable is required")
        if not self.wiener:
            raise ValueError("at least one Wiener variable is required")
        names = self.all_names
        for name in names:
            if not isinstance(name, str) or not name.isidentifier():
                raise ValueError(f"invalid variable name {name!r}")
            if name in FUNCTIONS:
                raise ValueError(f"variable name {name!r} clashes with a function")
        if len(set(names)) != len(names):
            raise ValueError(f"variable names must be distinct: {names}")

    @property
    def n(self) -> int:
        return len(self.state)

    @property
    def m(self) -> int:
        return len(self.wiener)

    @property
    def all_names(self) -> tuple[str, ...]:
        return self.state + (self.time,) + self.wiener

    def with_state(self, state) -> VarSpace:
        return VarSpace(tuple(state), self.time, self.wiener)

    def with_wiener(self, wiener) -> VarSpace:
        return VarSpace(self.state, self.time, tuple(wiener))


@dataclass(frozen=True)
class Domains:
    """Per-variable sampling intervals with a common default."""

    intervals: dict = field(default_factory=dict)
    default: tuple[float, float] = (0.3, 2.0)

    def __hash__(self) -> int:
        return hash((tuple(sorted(self.intervals.items())), self.default))

    def interval(self, name: str) -> tuple[float, float]:
        lo, hi = self.intervals.get(name, self.default)
        return float(lo), float(hi)

    def merged(self, other: Domains | dict | None) -> Domains:
        if other is None:
            return self
        extra = other.intervals if isinstance(other, Domains) else other
        d = dict(self.intervals)
        d.update({k: tuple(v) for k, v in extra.items()})
        return Domains(d, self.default)


DEFAULT_DOMAINS = Domains()
