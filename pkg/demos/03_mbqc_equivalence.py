"""Measured cluster states versus RXPM boundary symmetries.

Measuring the bulk of a 2D cluster state in Y or Z leaves the top row in a
stabilizer state. The Y/Z pattern maps to an RXPM disorder realization, and the
entanglement of a boundary interval tracks half the boundary symmetry entropy
up to an area-law correction.
"""

from plaqsym.stabilizer import MeasurementPattern, check_equivalence, mbqc_realization

L = 12
r = mbqc_realization(L, L, 0.743, seed=7)
rep = check_equivalence(r, MeasurementPattern.from_realization(r))
print(f"commutator matrix equals RXPM parity matrix: {rep.parity_matches}")
print(" length   S_A   symS_bd/2")
for x1, n, s, sym, la in rep.rows:
    if x1 == 0:
        print(f"  {n:4d}  {s:5g}  {sym / 2:7g}")
print(f"largest |S_A - symS/2| - l_A over all intervals: {rep.max_violation:g}")
