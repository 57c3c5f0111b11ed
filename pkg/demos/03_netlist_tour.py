"""Tour of the `.pnl` netlist language: parse, format, compile, diagnose.

A chip is a pair of spatial ports plus an ordered list of component
statements; compiling lowers each statement to a Kraus channel on the
four-dimensional (channel x polarization) space and composes them in
statement order.
"""

import numpy as np

from swapsim import netlist as nl

SRC = """\
# the measured SWAP chip, facets included
chip swap {
  ports T, B;
  facet fin  (T, B) loss_h=3dB loss_v=3dB;
  pcnot c1   (T, B) extinction=18dB imbalance=0.45dB;
  mcnot rot  (T)    extinction=20dB loss=1dB;
  pcnot c2   (T, B) extinction=18dB imbalance=0.45dB;
  facet fout (T, B) loss_h=3dB loss_v=3dB;
}
"""

ast = nl.parse(SRC)
print("canonical form (comments are discarded):\n")
print(nl.format_netlist(ast))

chip = nl.compile_netlist(ast)
k = chip.channel().kraus[0]
print("composed transfer matrix magnitudes:")
print(np.round(np.abs(k), 3))

print("\nerrors carry source spans and stable codes:")
for bad in (
    "chip c { ports T, B; pcnot a (T, X); }",
    "chip c { ports T, B; gizmo g (T); }",
    "chip c { ports T, B; pcnot a (T, B) extinction=18parsec; }",
    "chip c { ports T, B, C; pcnot a (T, B); }",
):
    try:
        nl.compile_netlist(nl.parse(bad))
        print("  unexpectedly fine:", bad)
    except (nl.ParseError, nl.CompileError) as err:
        print(f"  {err.span}: {err.code}: {err.message}")
