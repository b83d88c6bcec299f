"""Tour of variable-exponent norms on a uniform grid.

Builds a handful of exponent fields on the unit cube, computes modulars and
Luxemburg norms of random test fields, and demonstrates the three structural
facts the library guarantees: the unit-ball property (the normalized field
has modular one), the product-norm bound with constant 2, and the duality
sandwich between the direct conjugate norm and its dictionary estimate.

Run:  python3 demos/norms_tour.py
"""

import numpy as np

from vexpot.exponents import (
    affine_exponent,
    bump_exponent,
    constant_exponent,
    dual,
    estimate_log_holder,
)
from vexpot.grids import BOUNDED, BoxDomain
from vexpot.norms import (
    luxemburg_norm,
    make_test_dictionary,
    modular,
    verify_duality,
    verify_holder,
    verify_poincare,
)

SHAPE = (25, 25, 25)


def main():
    domain = BoxDomain((0.0, 0.0, 0.0), (1.0, 1.0, 1.0), BOUNDED)
    exponents = {
        "p = 2": constant_exponent(2.0, domain),
        "p = 2.5 + 0.5 x0": affine_exponent(2.5, 0.5, domain),
        "p = 2 + bump": bump_exponent(2.0, 0.8, (0.5, 0.5, 0.5), 0.25,
                                      domain),
    }
    fields = make_test_dictionary(domain, SHAPE, 4, seed=7)

    print("== exponent fields ==")
    for label, p in exponents.items():
        smooth = estimate_log_holder(p, 4000)
        print(f"  {label:<18s} range [{p.p_minus:.3f}, {p.p_plus:.3f}]"
              f"  log-regularity estimate {smooth:.3f}")

    print("\n== Luxemburg norms and the unit-ball property ==")
    for label, p in exponents.items():
        for i, f in enumerate(fields[:2]):
            norm = luxemburg_norm(f, p).value
            rho = modular(f.with_values(f.values / norm), p)
            print(f"  {label:<18s} field-{i}: norm {norm:.6f}, "
                  f"modular of f/norm = {rho:.12f}")

    print("\n== product-norm bound  ||fg|| <= 2 ||f||_p ||g||_q ==")
    p = constant_exponent(2.4, domain)
    q = affine_exponent(2.8, 0.4, domain)
    for i in range(3):
        chk = verify_holder(fields[i], fields[i + 1], p, q)
        print(f"  pair {i}: ratio to bound {chk.ratio:.4f} "
              f"(passed: {chk.passed})")

    print("\n== duality sandwich for the conjugate norm ==")
    p = exponents["p = 2.5 + 0.5 x0"]
    print(f"  conjugate exponent range "
          f"[{dual(p).p_minus:.3f}, {dual(p).p_plus:.3f}]")
    for i, f in enumerate(fields[:3]):
        chk = verify_duality(f, p)
        print(f"  field-{i}: direct {chk.direct_norm:.6f}, "
              f"dictionary estimate {chk.estimate.value:.6f}, "
              f"in [half, twice]: {chk.passed}")

    print("\n== mean-oscillation ratio (deviation vs scaled gradient) ==")
    for label, p in exponents.items():
        worst = max(verify_poincare(f, p).ratio for f in fields)
        print(f"  {label:<18s} worst ratio over fields: {worst:.4f}")


if __name__ == "__main__":
    main()
