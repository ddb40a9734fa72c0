"""Overlay the closed-form isoperfs with those of a GP fitted to the same data.

Inside the sampled region the two families should nearly coincide.
"""

# %% data and fits
import sys
from pathlib import Path

import numpy as np

from perffunc.analysis import GridSpec, compare_isoperfs, gpr_isoperf_contour, isoperf_bundle
from perffunc.core import AmueParams, RealizableRegion, amue_eval
from perffunc.fitting import FitOptions, fit_gpr
from perffunc.ingest import ExperimentContext, ObservationSet
from perffunc.render import TmDiagramSpec, render_tm_diagram

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(parents=True, exist_ok=True)

truth = AmueParams(45.0, 0.6, 0.35, 1.8, 0.3)
T, M = np.meshgrid(np.linspace(400, 3696, 10), np.linspace(400, 5000, 10))
T, M = T.ravel(), M.ravel()
obs = ObservationSet.from_arrays(ExperimentContext("sw", 3696.0), T, M, amue_eval(truth, T, M))
gp = fit_gpr(obs, FitOptions(restarts=3))

# %% compare level sets inside the data hull
hull = GridSpec(3696.0, 5000.0, 200, 200, 400.0, 400.0)
levels = [64.0, 67.0, 70.0, 73.0]
for cmp in compare_isoperfs(truth, gp, levels, hull):
    print(f"level {cmp.level}: max relative gap in M {cmp.max_rel_diff_m:.4f} over {cmp.n_shared} points")

# %% draw both families
extra = [c for lvl in levels for c in gpr_isoperf_contour(gp, lvl, hull)]
spec = TmDiagramSpec(
    contours=isoperf_bundle(truth, levels, 3696.0, 300),
    extra_contours=extra,
    region=RealizableRegion(3696.0),
    t_range=(0.0, 4000.0),
    m_range=(0.0, 5500.0),
    title="additive (solid) vs GP (dashed)",
)
target = out / "amue_vs_gpr.svg"
target.write_text(render_tm_diagram(spec))
print(f"wrote {target}")
