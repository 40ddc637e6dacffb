"""Walk through the traversal geometry of the reference scenario.

Four roof relays, 25 m apart, cross a 200 m cell at 300 km/h.  The run
splits into 12 segments: three while the relays enter one by one, six
equal location bins while all four are covered, and three while they
leave.  Power allocation downstream is constant within each segment.
"""

import numpy as np

from railpower import (mr_position, mr_rrh_distance, mrs_in_cell, reference_config,
                       segment_boundaries)

cfg = reference_config()
sched = segment_boundaries(cfg)

print(f"cell width          : {cfg.d_l:.0f} m")
print(f"relays              : {cfg.num_relays} spaced {cfg.d_mr:.0f} m apart")
print(f"train speed         : {cfg.v * 3.6:.0f} km/h ({cfg.v:.2f} m/s)")
print(f"segments            : {cfg.num_segments}")
print(f"traversal time      : {sched.total_time:.2f} s")
print()

print("segment  window [s]        dur [s]  relays covered")
for j in range(1, cfg.num_segments + 1):
    t0, t1 = sched.boundaries[j - 1], sched.boundaries[j]
    print(f"{j:>7}  [{t0:5.2f}, {t1:5.2f})   {t1 - t0:7.3f}  {mrs_in_cell(cfg, j)}")

print()
print("relay positions and radio-head distances at a few instants:")
for t in (0.0, 0.9, 1.65, 2.4, sched.total_time):
    pos = [mr_position(cfg, i, t) for i in range(1, 5)]
    dist = [mr_rrh_distance(cfg, i, t) for i in range(1, 5)]
    pos_s = " ".join(f"{x:7.1f}" for x in pos)
    dist_s = " ".join(f"{d:6.1f}" for d in dist)
    print(f"  t={t:4.2f} s  x [m]: {pos_s}   d [m]: {dist_s}")

# mirror symmetry of the layout: the second half of the traversal is the
# first half run backwards with the relay order reversed
t_probe = 0.7
d_fwd = mr_rrh_distance(cfg, 1, t_probe)
d_rev = mr_rrh_distance(cfg, 4, sched.total_time - t_probe)
print(f"\nmirror check: d_1({t_probe}) = {d_fwd:.3f} m, "
      f"d_4(T - {t_probe}) = {d_rev:.3f} m, "
      f"difference {abs(d_fwd - d_rev):.2e} m")
assert np.isclose(d_fwd, d_rev)
