# Drawing the Poincare ball
# =========================
#
# A single static picture summarizes the qualitative story: the unit ball
# with the ten equilibria at infinity on its boundary (disks for
# attractors and repellers, diamonds for saddles, larger markers for the
# first-octant points) and a few compactified trajectories flowing to the
# boundary.

from pathlib import Path

from flagflow import IntegratorConfig, integrate_compactified, find_infinity_equilibria
from flagflow import invariant_directions, model_poly_field
from flagflow.svgplot import ball_portrait_svg

field = model_poly_field()
equilibria = find_infinity_equilibria(field)
targets = [e.direction for e in equilibria]

starts = [2.0 * d for d in invariant_directions()]
starts += [(1.3, 1.1, 1.6), (0.9, 2.4, 0.7), (2.2, 0.8, 1.1)]

cfg = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-11, max_step=0.25, t_end=30.0)
trajectories = []
for x0 in starts:
    traj = integrate_compactified(field, x0, cfg, targets=targets,
                                  convergence_radius=1e-5)
    trajectories.append(traj.states)

svg = ball_portrait_svg(equilibria, trajectories)
out = Path(__file__).with_name("ball_portrait.svg")
out.write_text(svg)
print("wrote", out)

# The same picture is available from the command line:
#
#     flagflow plot --out portrait.svg
