"""The semicircular search path and its two multiplier schedules.

Every attack query lies on the circle whose diameter is the chord from the
source to the current boundary point, inside the plane spanned by the chord
direction and the estimated normal. Walk both schedules and watch the
query angle and the guaranteed distance reduction.
"""

import math

import numpy as np

from cgba import (SemicircleFrame, cgba_multiplier, cgbah_multiplier,
                  search_direction, semicircle_point)

source = np.zeros(2)
anchor = np.array([2.0, 2.0])
eta = np.array([-1.0, 1.0]) / math.sqrt(2)   # estimated normal at the anchor
frame = SemicircleFrame.from_points(source, anchor, eta)

print(f"chord length     : {frame.radius_chord:.6f}")
print(f"theta_t          : {math.degrees(frame.theta_t):.2f} deg\n")

print("outward schedule (seeks a non-adversarial bracket):")
print("  i   psi_i        m_i        |x_q - source|")
for i in range(1, 7):
    m = cgba_multiplier(frame.theta_t, i)
    zeta = search_direction(frame, m)
    x_q = semicircle_point(frame, zeta)
    psi = math.degrees(math.acos(float(np.dot(zeta, frame.v_hat))))
    print(f"  {i}  {psi:8.4f} deg  {m:9.5f}   {np.linalg.norm(x_q - source):.6f}")

print("\nangle-halving schedule (seeks an adversarial point near the chord):")
print("  i   psi_i        m_i        |x_q - source|")
for i in range(1, 7):
    m = cgbah_multiplier(frame.theta_t, i)
    zeta = search_direction(frame, m)
    x_q = semicircle_point(frame, zeta)
    psi = math.degrees(math.acos(float(np.dot(zeta, frame.v_hat))))
    print(f"  {i}  {psi:8.4f} deg  {m:9.5f}   {np.linalg.norm(x_q - source):.6f}")

# Thales: the angle subtended at any path point by the diameter is a right
# angle, which is exactly why path points never leave the chord's disk.
zeta = search_direction(frame, cgba_multiplier(frame.theta_t, 2))
x_q = semicircle_point(frame, zeta)
a, b = x_q - source, x_q - anchor
angle = math.degrees(math.acos(float(np.dot(a, b))
                               / (np.linalg.norm(a) * np.linalg.norm(b))))
print(f"\ninscribed angle at a path point: {angle:.6f} deg")
