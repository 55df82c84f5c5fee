#!/usr/bin/env python3
"""Check, reduce and solve both worked examples and print the results."""

from stochsym.corpus import example1, example2
from stochsym.kozlov import explicit_solution, reduce_scalar
from stochsym.symmetry import check_symmetry


def main() -> None:
    for ex in (example1(), example2()):
        rep = check_symmetry(ex.sde, ex.field)
        print(f"{ex.name}")
        print(f"  equation  dy = ({ex.sde.drift[0]}) dt + ({ex.sde.noise[0][0]}) dw")
        print(f"  field     ({ex.field.phi[0]}) d/dy -> {rep.overall} {sorted(set(rep.methods.values()))}")
        red = reduce_scalar(ex.sde, ex.field)
        ch = red.provenance
        print(f"  change    {ch.new_state[0]} = {ch.forward[0]}  (inverse y = {ch.inverse[0]})")
        print(f"  reduced   dx = ({red.drift_t}) dt + ({red.noise_t}) dw")
        sol = explicit_solution(red, 1.0)
        print(f"  solution  x(t) = {sol.formula()}   [x(0) = 1]")
        print(f"            mean(1) = {sol.mean(1.0):.6f}, var(1) = {sol.var(1.0):.6f}")


if __name__ == "__main__":
    main()
