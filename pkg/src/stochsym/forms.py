"""Minimal exterior calculus over a fixed coordinate list.

One-forms are dicts ``coord -> coefficient``; two-forms are dicts
``(a, b) -> coefficient`` with ``a`` before ``b`` in the coordinate order.
Only what the Cartan formula needs is provided.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from .expr import Add, Expr, Mul, Neg, Num, differentiate, simplify


def _plus(a: Expr | None, b: Expr) -> Expr:
    return b if a is None else Add((a, b))


class Coordinates:
    def __init__(self, names: Sequence[str]) -> None:
        self.names = tuple(names)
        self.index = {n: i for i, n in enumerate(self.names)}

    def pair(self, a: str, b: str) -> tuple[tuple[str, str], int]:
        """Ordered key for ``da ^ db`` and the sign picked up by ordering."""
        if self.index[a] < self.index[b]:
            return (a, b), 1
        return (b, a), -1

    def d0(self, f: Expr) -> dict:
        """Exterior derivative of a function."""
        out = {}
        for c in self.names:
            df = differentiate(f, c)
            if df != Num(0):
                out[c] = df
        return out

    def d1(self, alpha: Mapping[str, Expr]) -> dict:
        """Exterior derivative of a one-form: ``d(a_b db) = d_a a_b da ^ db``."""
        out: dict = {}
        for b, coef in alpha.items():
            for a in self.names:
                if a == b:
                    continue
                da = differentiate(coef, a)
                if da == Num(0):
                    continue
                key, sign = self.pair(a, b)
                term = da if sign > 0 else Neg(da)
                out[key] = _plus(out.get(key), term)
        return {k: simplify(v) for k, v in out.items()}

    def interior1(self, X: Mapping[str, Expr], alpha: Mapping[str, Expr]) -> Expr:
        terms = [Mul((X[c], alpha[c])) for c in alpha if c in X]
        if not terms:
            return Num(0)
        return simplify(terms[0] if len(terms) == 1 else Add(terms))

    def interior2(self, X: Mapping[str, Expr], beta: Mapping[tuple, Expr]) -> dict:
        """``X _| (da ^ db) = X^a db - X^b da``."""
        out: dict = {}
        for (a, b), coef in beta.items():
            if a in X:
                out[b] = _plus(out.get(b), Mul((X[a], coef)))
            if b in X:
                out[a] = _plus(out.get(a), Neg(Mul((X[b], coef))))
        return {k: simplify(v) for k, v in out.items()}

    def lie_derivative1(self, X: Mapping[str, Expr], alpha: Mapping[str, Expr]) -> dict:
        """Cartan: ``L_X alpha = d(X _| alpha) + X _| d alpha``."""
        first = self.d0(self.interior1(X, alpha))
        second = self.interior2(X, self.d1(alpha))
        out = {}
        for c in self.names:
            parts = [p[c] for p in (first, second) if c in p]
            if parts:
                out[c] = simplify(parts[0] if len(parts) == 1 else Add(tuple(parts)))
        return out
