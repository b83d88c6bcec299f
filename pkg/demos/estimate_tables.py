"""Empirical inequality constants across exponents and grids.

For a few estimate families (whole-space Stokes, the layer operator, the
boundary trace operator) this measures both sides of the inequality over a
small family of random fixtures and prints the family supremum of the
left/right ratio — the empirical constant — at two spacings.  A stable
constant under refinement is the numerical signature that the inequality
scales the way it should.

Run:  python3 demos/estimate_tables.py   (a few minutes)
"""

from vexpot.exponents import affine_exponent, constant_exponent
from vexpot.grids import WHOLE_SPACE, BoxDomain
from vexpot.solvers import make_estimate_family, verify_estimate

ESTIMATES = ("stokes-whole", "stokes-layer", "boundary-operator")
SHAPES = (17, 33)


def exponent_menu():
    box = BoxDomain((-1.0,) * 3, (1.0,) * 3, WHOLE_SPACE)
    return (("p = 2", constant_exponent(2.0, box)),
            ("p = 3", constant_exponent(3.0, box)),
            ("p = 2.5 + 0.5 x0", affine_exponent(2.5, 0.5, box,
                                                 clamp=(2.0, 3.0))))


def main():
    for which in ESTIMATES:
        print(f"== {which} ==")
        families = {s: make_estimate_family(which, count=6, seed=0,
                                            shape=s) for s in SHAPES}
        for label, p in exponent_menu():
            sups = {}
            for s in SHAPES:
                rep = verify_estimate(which, families[s], p)
                sups[s] = rep.family_sup
            for arm in sorted(sups[SHAPES[0]]):
                coarse = sups[SHAPES[0]][arm]
                fine = sups[SHAPES[1]][arm]
                drift = fine / coarse if coarse > 0 else float("inf")
                print(f"  {label:<18s} {arm:<14s} "
                      f"sup@{SHAPES[0]} {coarse:8.4f}   "
                      f"sup@{SHAPES[1]} {fine:8.4f}   ratio {drift:.3f}")
        print()


if __name__ == "__main__":
    main()
