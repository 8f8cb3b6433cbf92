"""Simulate the spring system and probe cone invariance along trajectories.

The saturating spring with a fast first-order filter has three equilibria:
the origin and a symmetric pair at +/- x* where 7 tanh(x*) = 5 x*. A
1-dominant system cannot oscillate forever; bounded trajectories settle
toward equilibria, and differences of nearby trajectories order themselves
by the certificate cone.
"""

import numpy as np

from spdominance import (SPRING_INITIAL_CONDITIONS, certificate_cone,
                         cone_locate, find_equilibria, integrate,
                         monotone_probe, nonlinear_spring_certificate,
                         nonlinear_spring_system)

sys_ = nonlinear_spring_system(eps=0.01)
cert = nonlinear_spring_certificate()

print("equilibria:")
for q in find_equilibria(sys_):
    print("  ", np.round(q, 6))

print("\ntrajectories (t_final = 9):")
for ic in SPRING_INITIAL_CONDITIONS:
    traj = integrate(sys_, ic, (0, 9.0))
    print(f"  from {ic}: final state {np.round(traj.final_state, 4)}")

# classify the difference of two runs against the certificate cone at a
# few times; after the fast transient it should sit inside
cone = certificate_cone(cert)
a = integrate(sys_, [1.0, 1.0, 1.0], (0, 9.0))
b = integrate(sys_, [0.5, 0.8, 1.0], (0, 9.0))
print("\ndifference of two trajectories vs the cone:")
for t in (0.0, 0.5, 2.0, 8.0):
    i = np.searchsorted(a.times, t)
    d = a.states[i] - b.states[i]
    print(f"  t={t:<4} {cone_locate(cone, d).value}")

# the seeded probe does this at scale: 20 pairs x 200 sample times
probe = monotone_probe(sys_, cert, n_pairs=20, t_final=9.0, seed=42)
print(f"\nprobe: {probe['interior']} interior, "
      f"{probe['boundary_warnings']} boundary, {probe['outside']} outside "
      f"of {probe['total_classifications']} classifications")
