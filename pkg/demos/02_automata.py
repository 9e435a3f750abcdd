"""Boundary symmetries as cellular-automaton histories.

Starting from a free top edge, each symmetry generator is pushed down one layer
at a time. The triangular model gives the rule-18 automaton (Pascal's triangle
mod 2); single-site terms zero the site they sit on. The X-shaped model gives a
reversible second-order automaton with impurities.
"""

from plaqsym.automata import run_dynamics, space_time_snapshot
from plaqsym.symmetry import top_bottom_mutual_info

print("Rule-18 from a clean lattice (p = 1):")
print(space_time_snapshot("rtpm", 33, 16, 1.0, 0))
print()
print("Same automaton with 20% single-site terms (operator dies out):")
print(space_time_snapshot("rtpm", 33, 16, 0.8, 1))
print()

# Top-bottom symmetry mutual information decays with cylinder height.
for model, p in (("rtpm", 0.81), ("rxpm", 0.743)):
    print(f"{model} at p={p}: top-bottom symI vs L_tau on L=32")
    for lt in (4, 8, 16, 32, 64):
        dt = run_dynamics(model, 32, lt, p, seed=3)
        g = dt.geometry
        v = top_bottom_mutual_info(dt.as_symmetry_tableau(), g.top_boundary(), g.bottom_boundary())
        print(f"  L_tau={lt:3d}  symI={v}")
