#!/usr/bin/env python3
"""Truncated Dyson expansion of the interaction-picture cocycle.

The cocycle G(t) = exp(itH_coupled) exp(-itH_free) solves
dG/dt = i lam G V(t) with V(t) the freely evolved coupling; truncating its
Picard iteration at order k leaves an error below

    (|lam| ||V|| |t|)^(k+1) exp(|lam| ||V|| |t|) / (k+1)!

The table prints the measured error against that envelope for growing order,
at a coupling strength where lam ||V|| t = 1.
"""

import numpy as np

from fcslab import dyson_cocycle, dyson_error_bound, exact_cocycle
from fcslab.linalg import op_norm
from fcslab.scenarios import random_scenario

scn = random_scenario(np.random.default_rng(12), dim_sys=2, dim_res=3, lam=0.4)
t = 1.0 / (abs(scn.lam) * op_norm(scn.v))
exact = exact_cocycle(scn, t)

print(f"lam ||V|| t = {abs(scn.lam) * op_norm(scn.v) * t:.2f}   (t = {t:.3f})")
print(f"{'order':>5} {'error':>12} {'envelope':>12} {'ratio':>8}")
for order in range(0, 7):
    err = op_norm(dyson_cocycle(scn, t, order) - exact)
    bound = dyson_error_bound(scn, t, order)
    print(f"{order:>5} {err:>12.3e} {bound:>12.3e} {err / bound:>8.3f}")
