"""Tabulate fiber holonomy against enclosed area for a sweep of circles.

Lifting a closed spherical curve horizontally and reading off how far the
endpoint rotated along the fiber reproduces -area/4pi modulo 1.  The sweep
walks a family of latitude circles from near the pole to near the equator,
then checks one wobbly closed loop for good measure.
"""

import math

import numpy as np

from bileg import sphere

AXIS = np.array([0.0, 0.0, 1.0])


def wobbly_loop(n=2048):
    # colatitude graph over a full sweep of azimuth
    t = np.linspace(0.0, 2.0 * math.pi, n)
    phi = 1.1 + 0.1 * np.cos(t) - 0.07 * np.sin(2.0 * t)
    samples = np.stack([
        np.sin(phi) * np.cos(t),
        -np.sin(phi) * np.sin(t),
        np.cos(phi),
    ], axis=1)
    samples[-1] = samples[0]
    return sphere.SphereCurve(samples, t, closed=True)


def main():
    print(f"{'colatitude':>12} {'area':>12} {'q fiber':>12} {'q area':>12} {'agree':>6}")
    for colat in np.linspace(0.3, math.pi / 2, 7):
        curve = sphere.latitude_circle(AXIS, float(colat), n=4096)
        area = sphere.signed_area(curve)
        q_h, q_a, ok = sphere.holonomy_area_check(curve, AXIS, "left")
        print(f"{colat:12.4f} {area:12.6f} {q_h:12.8f} {q_a:12.8f} {str(ok):>6}")

    curve = wobbly_loop()
    area = sphere.signed_area(curve)
    q_h, q_a, ok = sphere.holonomy_area_check(curve, AXIS, "left")
    print(f"{'loop':>12} {area:12.6f} {q_h:12.8f} {q_a:12.8f} {str(ok):>6}")

    # the equatorial case: area 2pi, the lift comes back to minus its start
    curve = sphere.latitude_circle(AXIS, math.pi / 2, n=4096)
    lift_start = sphere.hopf_preimage(AXIS, curve.samples[0], "left")
    lift = sphere.horizontal_lift(sphere.reparametrize(curve, 4096), AXIS,
                                  "left", lift_start)
    gap = np.linalg.norm(lift.samples[-1] + lift_start)
    print(f"\nequator lift endpoint: {np.round(lift.samples[-1], 6)}")
    print(f"distance from minus the start (half a fiber turn): {gap:.3e}")


if __name__ == "__main__":
    main()
