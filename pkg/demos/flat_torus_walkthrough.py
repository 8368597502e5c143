"""Walk a pair of closed spherical curves all the way to a flat-torus verdict.

Two perpendicular great circles produce the square torus: periods (pi, pi),
half-integer fiber rotations, flat metric, everything passes.  Circles
bounding caps of area 4 pi / 3 keep the double periodicity but lose the
immersion criterion, which the report shows line by line.
"""

import math

import numpy as np

from bileg import quat, sphere
from bileg.factory import (
    PeriodLattice,
    angle_function,
    flat_torus_criteria,
    residual_suite,
    torus_ansatz,
)


def latitude_through(start3, pole3, colat, ccw=False, n=4097):
    """Latitude circle about pole3 starting nearest start3, arc length from 0."""
    p = np.asarray(pole3, float) / np.linalg.norm(pole3)
    s = np.asarray(start3, float)
    e1 = s - np.dot(s, p) * p
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(p, e1)
    sphi = math.sin(colat)
    period = math.pi * sphi
    t = np.linspace(0.0, period, n)
    tau = 2.0 * t / sphi
    sgn = 1.0 if ccw else -1.0
    plane = np.cos(tau)[:, None] * e1 + sgn * np.sin(tau)[:, None] * e2
    samples = math.cos(colat) * p + sphi * plane
    samples[-1] = samples[0]
    return sphere.SphereCurve(samples, t, closed=True, b4_length=period)


def cap_pair(cos_colat):
    colat = math.acos(cos_colat)
    z = np.array([0.0, 0.0, 1.0])
    tilt1 = cos_colat * z + math.sin(colat) * np.array([1.0, 0.0, 0.0])
    tilt2 = cos_colat * (-z) + math.sin(colat) * np.array([0.0, 1.0, 0.0])
    return (latitude_through(z, tilt1, colat),
            latitude_through(-z, tilt2, colat, ccw=True))


def report(name, c1, c2):
    print(f"== {name} ==")
    print(f"enclosed areas: {sphere.signed_area(c1):+.6f}, "
          f"{sphere.signed_area(c2):+.6f}")
    grid, lattice = torus_ansatz(quat.ONE, quat.QK, c1, c2, n1=65, n2=65)
    if not isinstance(lattice, PeriodLattice):
        print(f"no period lattice: {lattice.reason}")
        return
    print(f"periods: p1 = {lattice.p1:.9f}, p2 = {lattice.p2:.9f}")
    print(f"fiber rotations: q1 = {lattice.q1} ({lattice.q1_measured:.9f}), "
          f"q2 = {lattice.q2} ({lattice.q2_measured:.9f})")
    worst = max(residual_suite(grid).values())
    print(f"worst residual over the fundamental rectangle: {worst:.3e}")
    ang = angle_function(grid)
    print(f"angle at the origin: {ang.theta0:.6f} rad")
    rep = flat_torus_criteria(grid, lattice)
    print(f"half-integer rotations: {rep.half_integer_rotations}")
    print(f"projection immersed:    {rep.immersed} (margin {rep.margin:.3e})")
    print(f"curvature integrals:    {rep.kappa1_integral:+.3e}, "
          f"{rep.kappa2_integral:+.3e}")
    print(f"flat torus:             {rep.satisfied}")
    print()


def main():
    c1 = latitude_through([0, 0, 1], [1, 0, 0], math.pi / 2)
    c2 = latitude_through([0, 0, -1], [0, 1, 0], math.pi / 2, ccw=True)
    report("two perpendicular great circles", c1, c2)
    report("cap area 4pi/3 circles", *cap_pair(1.0 / 3.0))
    # an incommensurable cap: the rotation numbers refuse to snap
    report("cap area with cos(colat) = 1/sqrt(5)", *cap_pair(1.0 / math.sqrt(5.0)))


if __name__ == "__main__":
    main()
