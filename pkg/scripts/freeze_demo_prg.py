"""Search for the demo generator: first seed whose four local tables (k=2, m=3) are all below the census median."""

from qmcsp import cryptodemo
from qmcsp.qcore.gates import grev

census = cryptodemo.complexity_census(3, grev(), t=1)
seed, prg = cryptodemo.find_demo_prg(census)
print(f"census median {census.median}, histogram {census.histogram}")
print(f"DEMO_PRG_SEED = {seed}")
print(f"DEMO_PRG_TABLE = {prg.table}")
for x in range(4):
    T = cryptodemo.local_prg_truth_table(prg, format(x, "02b"), 3)
    print(f"  x={x:02b}  table {T}  CC {census.of(T)}")
