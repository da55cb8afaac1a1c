"""Sum the twin-basic binomial series and compare it with its product form."""

from fractions import Fraction

from twinbasic.numkernel import format_scalar, precision
from twinbasic.pqcore import BasePair, poch_ratio_infinite
from twinbasic.series import Phi, eval_Phi

base = BasePair(Fraction(3, 2), Fraction(1, 2))
a, b, z = Fraction(1, 2), Fraction(-1, 3), Fraction(3, 4)

with precision(40):
    sv = eval_Phi(Phi([(a, b)], [], base, z))
    product = poch_ratio_infinite([(base.p, b * z)], [(base.p, a * z)], base)
    print("series :", format_scalar(sv.value, 40))
    print("product:", format_scalar(product, 40))
    print("terms  :", sv.terms_used, " tail bound:", format_scalar(sv.tail_bound, 5))

# terminating case: exact rational arithmetic throughout
n = 4
exact = eval_Phi(Phi([(base.q**n, base.p**n)], [], base, z))
print(f"terminating n={n}:", exact.value)
