"""Bilateral 1Psi1 sum against its closed product form, across the strip."""

from fractions import Fraction

from twinbasic.identities import verify_identity
from twinbasic.numkernel import precision

params = {"a": Fraction(1), "b": Fraction(2), "c": Fraction(3), "d": Fraction(1)}
base = (1, Fraction(1, 2))

# the series converges for |d/b| < |z| < |c/a|, here 1/2 < |z| < 3
with precision(50):
    for z in (Fraction(3, 5), Fraction(1), Fraction(-2), Fraction(5, 2)):
        r = verify_identity("ramanujan_sum", {**params, "z": z}, base)
        print(f"z={str(z):>5}  pass={r.passed}  rel residual {r.rel_residual}")
    outside = verify_identity("ramanujan_sum", {**params, "z": Fraction(4)}, base)
    print("z=4:", outside.notes[-1])
