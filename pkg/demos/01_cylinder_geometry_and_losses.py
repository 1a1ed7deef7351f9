#!/usr/bin/env python3
"""
Cylinder geometry and pose-loss walkthrough.

Casts a camera's view ray onto the cylinder fuselage model, then scores a
perturbed pose estimate with the position, orientation, and image-centre
surface losses, and shows how the log-variance weights re-balance them.
"""

import math

import numpy as np

from ptzscan import (
    CameraPose,
    CylinderModel,
    LossWeights,
    PoseSample,
    combined_loss,
    intersect_cylinder,
    optimal_log_variance,
    quat_from_yaw_pitch,
    view_ray,
)


def main():
    print("--- 1. A camera looking at the fuselage ---\n")
    cylinder = CylinderModel(axis_height=2.0, radius=2.0)
    position = np.array([-7.0, 1.5, 6.0])
    # Yaw 5 deg, pitched 30 deg down so the optical axis meets the surface.
    pose = CameraPose(position, quat_from_yaw_pitch(5.0, 30.0))
    hit = intersect_cylinder(view_ray(pose), cylinder)
    print(f"camera at {position}, view axis hits the surface at")
    print(f"  ({hit[0]:.4f}, {hit[1]:.4f}, {hit[2]:.4f}) m")
    radial = math.hypot(hit[0], hit[2] - cylinder.axis_height)
    print(f"  radial distance from the axis: {radial:.6f} m (radius is 2)\n")

    print("--- 2. Scoring a perturbed pose estimate ---\n")
    rng = np.random.default_rng(42)
    sample = PoseSample(
        true_pose=pose,
        predicted_position=position + rng.normal(0.0, 0.15, 3),
        predicted_orientation_raw=pose.orientation + rng.normal(0.0, 0.01, 4),
    )
    zero = LossWeights(s_x=0.0, s_q=0.0, s_c=0.0)
    breakdown = combined_loss(sample, zero, cylinder=cylinder)
    print(f"position loss      l_x = {breakdown.l_x:.6f}")
    print(f"orientation loss   l_q = {breakdown.l_q:.6f}")
    print(f"surface loss       l_c = {breakdown.l_c:.6f}  ({breakdown.icsc_status})")
    print(f"total at zero weights  = {breakdown.total:.6f}")
    print("  (with all log-variances zero the total is the plain sum)\n")

    print("--- 3. Balancing the components ---\n")
    # The optimal log-variance for a component equals the log of its mean
    # loss; at that setting the weighted term has zero gradient in s.
    for name, value in (("l_x", breakdown.l_x), ("l_q", breakdown.l_q), ("l_c", breakdown.l_c)):
        s_star = optimal_log_variance(value)
        weighted = value * math.exp(-s_star) + s_star
        print(f"{name}: mean {value:.6f} -> s* = {s_star:+.4f}, weighted term {weighted:.4f}")
    weights = LossWeights(
        s_x=optimal_log_variance(breakdown.l_x),
        s_q=optimal_log_variance(breakdown.l_q),
        s_c=optimal_log_variance(breakdown.l_c),
    )
    balanced = combined_loss(sample, weights, cylinder=cylinder)
    print(f"\nbalanced total = {balanced.total:.6f}")


if __name__ == "__main__":
    main()
