#!/usr/bin/env python3
"""Disguise state-free equations by catalog maps and reduce them back."""

import argparse
import random
import time

from stochsym.expr import Add, Neg, VarSpace, ZeroTestConfig, is_zero
from stochsym.kozlov import reduce_scalar
from stochsym.sde_model import make_sde
from stochsym.transform import SCRAMBLE_CATALOG, make_scrambled_instance, verify_symmetry_preserved

TIME_COEFFS = ("1", "2", "1/2", "-1", "exp(-t)", "1+t", "cos(t)", "t^2 + 1")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = random.Random(args.seed)
    U = VarSpace(("u",))
    failures = 0
    t0 = time.perf_counter()
    for i in range(args.count):
        kind = SCRAMBLE_CATALOG[i % len(SCRAMBLE_CATALOG)]
        base = make_sde(U, [rng.choice(TIME_COEFFS)], [[rng.choice(TIME_COEFFS)]])
        sde, X, ch = make_scrambled_instance(base, kind, args.seed + i)
        cfg = ZeroTestConfig(domains=ch.new_domains())
        verify_symmetry_preserved(sde, X, ch.inverse_change(), cfg)
        red = reduce_scalar(sde, X, cfg)
        ok = all(
            is_zero(Add((got, Neg(want))), names=("t",)).is_zero
            for got, want in ((red.drift_t, base.drift[0]), (red.noise_t, base.noise[0][0]))
        )
        failures += not ok
        print(f"{'ok ' if ok else 'BAD'} {kind:8s} y = {ch.forward[0]}")
        print(f"      dy = ({sde.drift[0]}) dt + ({sde.noise[0][0]}) dw")
        print(f"      reduced: f = {red.drift_t}, sigma = {red.noise_t}")
    print(f"{args.count - failures}/{args.count} recovered in {time.perf_counter() - t0:.2f}s")


if __name__ == "__main__":
    main()
