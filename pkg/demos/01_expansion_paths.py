"""How the cheapest data mix moves as the translation discount changes.

Uses the published Swahili coefficients at the full pivot size, with an
assumed zero-shot score of 50, and draws one T-M diagram per cost ratio.
"""

# %% setup
import sys
from pathlib import Path

from perffunc.analysis import isoperf_bundle
from perffunc.core import CostModel, RealizableRegion, approximate_path_slope, trace_expansion_path
from perffunc.render import TmDiagramSpec, isocosts_for_path, render_tm_diagram
from perffunc.tables import published_params

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

sw = published_params("sw", 3696, a_zs=50.0)
region = RealizableRegion(3696.0)
levels = [55.0, 60.0, 65.0, 70.0, 75.0]

# %% two price regimes
# A translated example costs 0.007. At ratio 0.1 a manual one costs 0.07;
# at ratio 0.01 it costs 0.7, so translation becomes far more attractive.
for ratio in (0.1, 0.01):
    cm = CostModel.from_ratio(0.007, ratio)
    path = trace_expansion_path(sw, cm, region, levels)
    print(f"ratio {ratio}: M/T slope of the path is about {approximate_path_slope(sw, cm):.3f}")
    for p in path:
        where = "boundary T = P" if p.on_boundary else "tangency"
        print(f"  pi={p.pi:5.1f}  T={p.t:8.1f}  M={p.m:8.1f}  cost={p.cost:7.2f}  ({where})")

    # %% draw it
    spec = TmDiagramSpec(
        contours=isoperf_bundle(sw, levels, 5000.0, 400),
        isocosts=isocosts_for_path(path, cm),
        path=path,
        region=region,
        t_range=(0.0, 5000.0),
        m_range=(0.0, 8000.0),
        title=f"sw, cost ratio {ratio}",
    )
    target = out / f"expansion_sw_ratio_{ratio}.svg"
    target.write_text(render_tm_diagram(spec))
    print(f"  wrote {target}")

# With cheap translation the path hugs the pivot limit: once every pivot
# example is translated, further gains come only from manual labels.
