"""
Point clouds and their persistence diagrams
===========================================

Builds the three synthetic shape classes, runs the Vietoris-Rips pipeline
on each, and shows what the diagrams look like and how stable they are
under small perturbations of the input.
"""

import numpy as np

from pdsemcom import (bottleneck_distance, synth_loops, vr_diagram)

# one object per class, same generator the sweep uses
for class_id, name in ((1, "one loop"), (2, "two loops"), (3, "open arc")):
    cloud = synth_loops(class_id, n_points=48, noise=0.2, seed=7, object_id=class_id)
    diag = vr_diagram(cloud.points, gamma_max=16.0)
    h1 = diag.points(1)
    print(f"class {class_id} ({name}): {cloud.n_points} points, "
          f"{diag.count(0)} H0 features, {diag.count(1)} H1 features")
    for b, d in h1:
        print(f"    loop born at {b:.2f}, filled at {d:.2f} "
              f"(persistence {d - b:.2f})")

# the loop count is the signature that separates the classes: one circle
# leaves one long-lived H1 feature, two tangent circles leave two, the arc
# leaves none of comparable persistence.

# stability: perturb every point by at most eps in l2 norm and compare
# diagrams. The bottleneck distance moves by a bounded amount.
print()
print("stability under perturbation (H1 channel):")
rng = np.random.default_rng(11)
cloud = synth_loops(1, n_points=48, noise=0.2, seed=7, object_id=1)
base = vr_diagram(cloud.points, gamma_max=16.0)
for eps in (0.05, 0.1, 0.2):
    step = rng.normal(size=cloud.points.shape)
    step *= eps / np.maximum(np.linalg.norm(step, axis=1, keepdims=True), 1e-12)
    moved = np.clip(cloud.points + step, 0.0, 28.0)
    other = vr_diagram(moved, gamma_max=16.0)
    d = bottleneck_distance(base.points(1), other.points(1))
    print(f"  eps={eps:.2f}  bottleneck={d:.4f}  (bound 2*eps={2 * eps:.2f})")

# exact unit square sanity check: four vertices, three H0 merges at side
# length 1, one loop born at 1 and filled at the diagonal sqrt(2)
square = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
diag = vr_diagram(square, gamma_max=16.0)
print()
print("unit square diagram:")
for dim in (0, 1):
    for (b, d) in diag.points(dim):
        print(f"  H{dim}: ({b:.6g}, {d:.6g})")
