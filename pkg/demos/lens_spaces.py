"""Print the invariant table of a few lens spaces, computed by all three routes."""
from plumbsw import hilbert, latcoh, surgery
from plumbsw.corpus import chain
from plumbsw.lattice import LatticeContext


def table(eulers):
    ctx = LatticeContext(chain(eulers))
    print(f"chain {eulers}: d={ctx.d}")
    for h in ctx.classes():
        s = hilbert.s_invariant(ctx, h)
        eu = latcoh.eu_lattice(ctx, ctx.spinc_char_class(h)).eu
        pc = surgery.sw_via_surgery(ctx, h)
        print(f"  {str(h):>8}  series {str(s):>8}  -eu {str(-eu):>8}  surgery {str(pc):>8}")


if __name__ == "__main__":
    for es in ([-5], [-2, -3], [-3, -2], [-2, -2, -2]):
        table(es)
