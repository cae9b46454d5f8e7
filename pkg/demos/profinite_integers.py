"""Finite stages of the profinite fundamental group of the circle site.

Two parallel arrows x => y give a single free generator, so the stage at bound m
is cyclic of order lcm(1..m), and each stage maps onto the previous one.

Run: python3 demos/profinite_integers.py
"""
import math

from topospi1.pi1 import fundamental_group, route_agreement, tower_surjection
from topospi1.site import circle_site

C = circle_site()
prev = None
for m in range(1, 7):
    fg = fundamental_group(C, m)
    agree = route_agreement(C, m, fg=fg).agree
    line = (f"m={m}: order {fg.group.order:3d} (lcm {math.lcm(*range(1, m + 1)):3d}), "
            f"cyclic={fg.group.is_cyclic()}, routes agree={agree}")
    if prev is not None:
        h = tower_surjection(fg, prev)
        line += f", maps onto m={m - 1}: {h is not None and h.is_surjective()}"
    print(line)
    prev = fg
