"""Expand (ax + by)^n under xy = q yx, ab = p^-1 ba and print the normal form."""

from fractions import Fraction

from twinbasic.noncomm import nc_binomial_power, verify_rtt

p, q = Fraction(2), Fraction(1, 3)
for n in range(4):
    lhs, first, second = nc_binomial_power(n, p, q, True)
    print(f"n={n}: {lhs}")
    assert lhs == first == second

print("RTT at (9/4, 1/4):", verify_rtt(Fraction(9, 4), Fraction(1, 4)))
