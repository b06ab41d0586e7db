"""Write boundary CSV and an SVG overlay of the running sets and one-step images.

Run: python3 demos/06_plotting.py [outdir]
"""
import sys

from invkit import build_closed_loop, example_system, marpi_compute
from invkit.plotting import emit

outdir = sys.argv[1] if len(sys.argv) > 1 else "demo_plots"
clm = build_closed_loop(example_system())
res = marpi_compute(clm)
for path in emit(outdir, res.set, clm, res.iterates[1:]):
    print("wrote", path)
