"""Run the constant-curvature verifiers over the pseudosphere and friends."""

import math

import numpy as np

from bileg.cec import (
    ThetaGrid,
    chebyshev_forms,
    flat_metric,
    fundamental_forms,
    gauss_lift,
    hazzidaki,
    hyperbolic_cylinder_patch,
    pseudosphere_patch,
    sine_gordon_residual,
)


def main():
    patch = pseudosphere_patch(161)
    forms = fundamental_forms(patch)
    print("pseudosphere (tractrix of revolution)")
    print(f"  det(shape) + 1:        {np.abs(forms.det_shape + 1.0).max():.3e}")

    lift = gauss_lift(patch, 1.0)
    for name in ("membership", "w_tangency", "omega_i", "omega_k_minus",
                 "derivative_identity"):
        print(f"  lift {name:20s} {lift.residuals[name]:.3e}")
    print(f"  lift omega_k_plus      {lift.residuals['omega_k_plus']:.3e}"
          "  (the mismatched sign, order one by design)")

    fm = flat_metric(patch, 1.0, "+")
    print(f"  I + III curvature:     {fm.curvature_residual:.3e}")

    cyl = hyperbolic_cylinder_patch(1.0, 129)
    fm2 = flat_metric(cyl, 1.0, "-")
    print("hyperbolic cylinder, radius 1")
    print(f"  I - III curvature:     {fm2.curvature_residual:.3e}")

    # the one-variable angle that solves the net-angle equation
    y = np.linspace(0.1, 3.0, 1001)
    x = np.linspace(-1.0, 1.0, 9)
    theta = np.broadcast_to(np.arctan(np.sinh(y)), (len(x), len(y))).copy()
    tg = ThetaGrid(x, y, theta, k=1.0)
    rep = sine_gordon_residual(tg)
    print("gudermannian angle theta = arctan(sinh y)")
    print(f"  net-angle residual:    {np.abs(rep.residual).max():.3e}")
    print(f"  integrated residual:   {rep.area_residual:.3e}")

    net = chebyshev_forms(tg)
    print(f"  net det(shape) + 1:    {np.abs(net.det_shape + 1.0).max():.3e}")

    # total curvature against the angle oscillation on a symmetric square
    xs = np.linspace(-1.0, 1.0, 161)
    quad = 0.8 + np.add.outer(xs ** 2, -(xs ** 2)) / 8.0
    hz = hazzidaki(ThetaGrid(xs, xs, quad, k=1.0))
    print("oscillation bound, theta = 0.8 + (x^2 - y^2)/8")
    print(f"  quadrature lhs:        {hz.lhs:.6f}")
    print(f"  corner telescoping:    {hz.corner_sum:.6f}")
    print(f"  4 x oscillation:       {hz.rhs:.6f}")
    print(f"  bound holds:           {hz.holds}")


if __name__ == "__main__":
    main()
