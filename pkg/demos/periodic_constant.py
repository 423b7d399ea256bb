"""Reduced series of a D4 graph at a leaf, and its periodic constant per class."""
from plumbsw import surgery
from plumbsw.corpus import dynkin_d
from plumbsw.graph import blow_up_edge
from plumbsw.lattice import LatticeContext

# the neighbour of a D4 leaf has valency 3, so blow up that edge first
g = blow_up_edge(dynkin_d(4), ("a00", "c"))
ctx = LatticeContext(g)
u = "a00"
print(f"blown-up D4: s={ctx.s} d={ctx.d}, periods tried {surgery.candidate_periods(ctx, u)}")
for h in ctx.classes():
    res = surgery.pc_of_reduced_series(ctx, h, u)
    print(f"  class {h}: pc = {res.value} (period {res.period_used}, "
          f"{res.coefficients_used} coefficients, nodes {res.fit_window})")
    print(f"    robust under doubling: {surgery.pc_robustness(ctx, h, u, res)}")
    print(f"    surgery identity: {surgery.verify_surgery_identity(ctx, h, u)}")
