"""Construction, factorization, and classification of bilegendrian surfaces.

A bilegendrian immersion of the plane into the unit tangent bundle of the
3-sphere is, up to isometry, a two-factor product

    phi(x1, x2) = (gamma2(x2) . a . gamma1(x1),  gamma2(x2) . b . gamma1(x1))

where a, b are orthogonal unit quaternions, gamma1 is a right horizontal
arc-length curve for the axis conj(a).b, and gamma2 is a left horizontal
arc-length curve for the axis b.conj(a).  This module builds such immersions
from factor curves (`construct`), recovers the factors from a sampled
immersion (`factorize`, `lie_factorize`), measures every structural residual
(`residual_suite`), extracts the angle function and asymptotic Frenet frames
that classify the immersion (`angle_function`, `asymptotic_frame`,
`from_theta`), and handles the doubly-periodic case: the torus ansatz from
closed spherical curves, the period lattice with its fiber rotation numbers,
the Gauss map factorization, and the flat-torus criteria.

Grids are indexed X[i, j] with i along x1 and j along x2.  Quaternions are
rows (w, x, y, z).
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.interpolate import CubicSpline

from . import quat, sphere
from ._fd import axis_array as _axis_array
from ._fd import d_uniform as _d_uniform
from ._fd import uniform_step as _uniform_step
from .errors import (
    NoMaximalLattice,
    NotFactorizable,
    PreconditionError,
    ValidationError,
)

_TWO_PI = 2.0 * math.pi

# J-eigenvalues of the two asymptotic directions
EPS1 = 1.0
EPS2 = -1.0


def _bdot(p, q):
    return np.sum(p * q, axis=-1)


def _vec(q):
    return np.asarray(q, dtype=float)[..., 1:]


def _as_unit_quat(value, name):
    arr = np.asarray(value, dtype=float)
    if arr.shape != (4,):
        raise ValidationError(f"{name} must be a quaternion 4-array, got shape {arr.shape}")
    if abs(np.linalg.norm(arr) - 1.0) > 1e-9:
        raise PreconditionError(f"{name} must be a unit quaternion")
    return arr


def _eval_curve(fn, ts):
    ts = np.asarray(ts, dtype=float)
    out = np.asarray(fn(ts), dtype=float)
    if out.shape != ts.shape + (4,):
        raise ValidationError(
            "factor curve callables must map a parameter array (N,) to quaternions (N, 4)"
        )
    return out


def _fd_curve(fn, ts, delta=1e-5):
    return (_eval_curve(fn, ts + delta) - _eval_curve(fn, ts - delta)) / (2.0 * delta)


@dataclass
class Factorization:
    """Factor data (a, b, gamma1, gamma2) of a product immersion.

    gamma1 and gamma2 are vectorized callables from parameters to unit
    quaternions with gamma(0) = 1; dgamma1 and dgamma2, when given, return
    their velocities and are used instead of finite differences.  t1_range
    and t2_range record the parameter intervals on which the callables are
    trusted.
    """

    a: np.ndarray
    b: np.ndarray
    gamma1: object
    gamma2: object
    dgamma1: object = None
    dgamma2: object = None
    t1_range: tuple = None
    t2_range: tuple = None

    def __post_init__(self):
        self.a = _as_unit_quat(self.a, "a")
        self.b = _as_unit_quat(self.b, "b")
        if abs(float(np.dot(self.a, self.b))) > 1e-9:
            raise PreconditionError("a and b must be orthogonal")
        zero = np.zeros(1)
        for name, fn in (("gamma1", self.gamma1), ("gamma2", self.gamma2)):
            g0 = _eval_curve(fn, zero)[0]
            if np.linalg.norm(g0 - quat.ONE) > 1e-9:
                raise PreconditionError(f"{name}(0) must be the identity")

    def axis1(self):
        """Right horizontality axis conj(a).b of the first factor."""
        return quat.mul(quat.conj(self.a), self.b)

    def axis2(self):
        """Left horizontality axis b.conj(a) of the second factor."""
        return quat.mul(self.b, quat.conj(self.a))

    def velocity1(self, ts):
        if self.dgamma1 is not None:
            return _eval_curve(self.dgamma1, np.asarray(ts, dtype=float))
        return _fd_curve(self.gamma1, np.asarray(ts, dtype=float))

    def velocity2(self, ts):
        if self.dgamma2 is not None:
            return _eval_curve(self.dgamma2, np.asarray(ts, dtype=float))
        return _fd_curve(self.gamma2, np.asarray(ts, dtype=float))


@dataclass
class ImmersionGrid:
    """Sampled legendrian-pair immersion on a rectangular parameter grid.

    X and Y are (N1, N2, 4) unit quaternion grids with b(X, Y) = 0, indexed
    [i, j] for (x1[i], x2[j]).  When the grid was assembled from factor
    curves the Factorization is attached and supplies analytic derivatives.
    """

    x1: np.ndarray
    x2: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    factors: Factorization = None

    def __post_init__(self):
        self.x1 = _axis_array(self.x1, "x1")
        self.x2 = _axis_array(self.x2, "x2")
        X = np.asarray(self.X, dtype=float)
        Y = np.asarray(self.Y, dtype=float)
        shape = (len(self.x1), len(self.x2), 4)
        if X.shape != shape or Y.shape != shape:
            raise ValidationError(f"X and Y must have shape {shape}")
        unit = max(
            float(np.abs(np.linalg.norm(X, axis=-1) - 1.0).max()),
            float(np.abs(np.linalg.norm(Y, axis=-1) - 1.0).max()),
        )
        if unit > 1e-9:
            raise ValidationError(f"X and Y must be unit grids, worst deviation {unit:.3e}")
        ortho = float(np.abs(_bdot(X, Y)).max())
        if ortho > 1e-9:
            raise ValidationError(f"X and Y must be pointwise orthogonal, worst {ortho:.3e}")
        self.X = X
        self.Y = Y

    def origin(self):
        """Indices (i0, j0) of the parameter origin; the grid must contain it."""
        i0 = int(np.argmin(np.abs(self.x1)))
        j0 = int(np.argmin(np.abs(self.x2)))
        if abs(self.x1[i0]) > 1e-9 or abs(self.x2[j0]) > 1e-9:
            raise ValidationError("the grid must contain the parameter origin (0, 0)")
        return i0, j0


def _partials(grid):
    """First partials (d1X, d2X, d1Y, d2Y): analytic when factors carry velocities."""
    f = grid.factors
    if f is not None and f.dgamma1 is not None and f.dgamma2 is not None:
        G1 = _eval_curve(f.gamma1, grid.x1)
        G2 = _eval_curve(f.gamma2, grid.x2)
        dG1 = f.velocity1(grid.x1)
        dG2 = f.velocity2(grid.x2)
        d1X = quat.mul(G2[None, :, :], quat.mul(f.a, dG1)[:, None, :])
        d2X = quat.mul(dG2[None, :, :], quat.mul(f.a, G1)[:, None, :])
        d1Y = quat.mul(G2[None, :, :], quat.mul(f.b, dG1)[:, None, :])
        d2Y = quat.mul(dG2[None, :, :], quat.mul(f.b, G1)[:, None, :])
        return d1X, d2X, d1Y, d2Y
    h1 = _uniform_step(grid.x1, "x1")
    h2 = _uniform_step(grid.x2, "x2")
    return (
        _d_uniform(grid.X, h1, 0),
        _d_uniform(grid.X, h2, 1),
        _d_uniform(grid.Y, h1, 0),
        _d_uniform(grid.Y, h2, 1),
    )


def _second_partials(grid, parts):
    """Seconds by differencing the first partials; mixed ones analytically if possible."""
    d1X, d2X, d1Y, d2Y = parts
    h1 = _uniform_step(grid.x1, "x1")
    h2 = _uniform_step(grid.x2, "x2")
    f = grid.factors
    if f is not None and f.dgamma1 is not None and f.dgamma2 is not None:
        dG1 = f.velocity1(grid.x1)
        dG2 = f.velocity2(grid.x2)
        d12X = quat.mul(dG2[None, :, :], quat.mul(f.a, dG1)[:, None, :])
        d12Y = quat.mul(dG2[None, :, :], quat.mul(f.b, dG1)[:, None, :])
    else:
        d12X = _d_uniform(d2X, h1, 0)
        d12Y = _d_uniform(d2Y, h1, 0)
    return {
        "11X": _d_uniform(d1X, h1, 0),
        "12X": d12X,
        "22X": _d_uniform(d2X, h2, 1),
        "11Y": _d_uniform(d1Y, h1, 0),
        "12Y": d12Y,
        "22Y": _d_uniform(d2Y, h2, 1),
    }


def _apply_A(X, Y, z):
    # quarter turn of the contact plane: A.z = Y . conj(X) . z
    return quat.mul(Y, quat.mul(quat.conj(X), z))


def construct(a, b, gamma1, gamma2, x1, x2, dgamma1=None, dgamma2=None,
              t1_range=None, t2_range=None, tol=1e-6):
    """Assemble the product immersion of two horizontal factor curves.

    gamma1 must be right horizontal for the axis conj(a).b and gamma2 left
    horizontal for b.conj(a), both arc-length parametrized with gamma(0) = 1.
    The horizontality and speed are checked by sampling; violations raise
    PreconditionError.  Returns the sampled grid with the factors attached.
    """
    x1 = _axis_array(x1, "x1")
    x2 = _axis_array(x2, "x2")
    if t1_range is None:
        t1_range = (min(float(x1[0]), 0.0), max(float(x1[-1]), 0.0))
    if t2_range is None:
        t2_range = (min(float(x2[0]), 0.0), max(float(x2[-1]), 0.0))
    factors = Factorization(a, b, gamma1, gamma2, dgamma1, dgamma2,
                            t1_range=t1_range, t2_range=t2_range)

    for index, (fn, vel, rng, axis, side) in enumerate(
        (
            (factors.gamma1, factors.velocity1, t1_range, factors.axis1(), "right"),
            (factors.gamma2, factors.velocity2, t2_range, factors.axis2(), "left"),
        ),
        start=1,
    ):
        ts = np.linspace(rng[0], rng[1], 257)
        G = _eval_curve(fn, ts)
        dG = vel(ts)
        if side == "right":
            horiz = float(np.abs(_bdot(dG, quat.mul(axis, G))).max())
        else:
            horiz = float(np.abs(_bdot(dG, quat.mul(G, axis))).max())
        speed = float(np.abs(np.linalg.norm(dG, axis=-1) - 1.0).max())
        if horiz > tol or speed > tol:
            raise PreconditionError(
                f"gamma{index} must be {side} horizontal and arc-length parametrized; "
                f"horizontality residual {horiz:.3e}, speed residual {speed:.3e}"
            )

    G1 = _eval_curve(factors.gamma1, x1)
    G2 = _eval_curve(factors.gamma2, x2)
    X = quat.mul(G2[None, :, :], quat.mul(factors.a, G1)[:, None, :])
    Y = quat.mul(G2[None, :, :], quat.mul(factors.b, G1)[:, None, :])
    norms = np.linalg.norm(X, axis=-1)
    X = X / norms[..., None]
    Y = Y / np.linalg.norm(Y, axis=-1)[..., None]
    return ImmersionGrid(x1, x2, X, Y, factors=factors)


def factorize(grid, tol=1e-6):
    """Recover the factor data of a sampled product immersion.

    Reads a = X(0,0), b = Y(0,0), gamma1 = conj(a).X(., 0) and
    gamma2 = X(0, .).conj(a), interpolates the axis samples with splines, and
    checks that the product reproduces the whole grid.  Raises NotFactorizable
    when the reconstruction residual exceeds tol.
    """
    i0, j0 = grid.origin()
    a = grid.X[i0, j0]
    b = grid.Y[i0, j0]
    G1 = quat.mul(quat.conj(a), grid.X[:, j0])
    G2 = quat.mul(grid.X[i0, :], quat.conj(a))

    Xr = quat.mul(G2[None, :, :], quat.mul(a, G1)[:, None, :])
    Yr = quat.mul(G2[None, :, :], quat.mul(b, G1)[:, None, :])
    residual = max(
        float(np.linalg.norm(grid.X - Xr, axis=-1).max()),
        float(np.linalg.norm(grid.Y - Yr, axis=-1).max()),
    )
    if residual > tol:
        raise NotFactorizable(
            f"the grid is not a two-factor product: reconstruction residual {residual:.3e}"
        )

    spl1 = CubicSpline(grid.x1, G1)
    spl2 = CubicSpline(grid.x2, G2)
    return Factorization(
        a, b, spl1, spl2, spl1.derivative(), spl2.derivative(),
        t1_range=(float(grid.x1[0]), float(grid.x1[-1])),
        t2_range=(float(grid.x2[0]), float(grid.x2[-1])),
    )


@dataclass
class LieFactors:
    """Separable factorization M(x1, x2) = B(x2) . C . A(x1) of a group-valued grid."""

    x1: np.ndarray
    x2: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    criterion_residual: float
    reconstruction_residual: float


def _rk4_quat(y, t, h, rhs):
    k1 = rhs(t, y)
    k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
    k4 = rhs(t + h, y + h * k3)
    y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y / np.linalg.norm(y)


def _march_group(ts, i0, rhs):
    out = np.empty((len(ts), 4))
    out[i0] = quat.ONE
    y = quat.ONE.copy()
    for i in range(i0, len(ts) - 1):
        y = _rk4_quat(y, ts[i], ts[i + 1] - ts[i], rhs)
        out[i + 1] = y
    y = out[i0].copy()
    for i in range(i0, 0, -1):
        y = _rk4_quat(y, ts[i], ts[i - 1] - ts[i], rhs)
        out[i - 1] = y
    return out


def lie_factorize(x1, x2, M, tol=1e-6):
    """Split a unit quaternion grid into B(x2) . C . A(x1), if possible.

    The split exists iff the logarithmic derivative criterion holds:
    d2(conj(M) d1M) = d1((d2M) conj(M)) = 0.  Its worst residual above tol
    raises NotFactorizable.  A and B are integrated from the criterion data
    along the axes with A(0) = B(0) = 1, and C = M(0, 0).
    """
    x1 = _axis_array(x1, "x1")
    x2 = _axis_array(x2, "x2")
    M = np.asarray(M, dtype=float)
    if M.shape != (len(x1), len(x2), 4):
        raise ValidationError(f"M must have shape {(len(x1), len(x2), 4)}")
    norms = np.linalg.norm(M, axis=-1)
    if np.abs(norms - 1.0).max() > 1e-6:
        raise ValidationError("M must consist of unit quaternions")
    M = M / norms[..., None]
    h1 = _uniform_step(x1, "x1")
    h2 = _uniform_step(x2, "x2")
    i0 = int(np.argmin(np.abs(x1)))
    j0 = int(np.argmin(np.abs(x2)))
    if abs(x1[i0]) > 1e-9 or abs(x2[j0]) > 1e-9:
        raise ValidationError("the grid must contain the parameter origin (0, 0)")

    d1M = _d_uniform(M, h1, 0)
    d2M = _d_uniform(M, h2, 1)
    U = quat.mul(quat.conj(M), d1M)
    V = quat.mul(d2M, quat.conj(M))
    criterion = max(
        float(np.linalg.norm(_d_uniform(U, h2, 1), axis=-1).max()),
        float(np.linalg.norm(_d_uniform(V, h1, 0), axis=-1).max()),
    )
    if criterion > tol:
        raise NotFactorizable(
            f"the product criterion fails with residual {criterion:.3e}; "
            "the grid does not separate into single-variable factors"
        )

    alpha = CubicSpline(x1, U[:, j0])
    beta = CubicSpline(x2, V[i0, :])
    A = _march_group(x1, i0, lambda t, y: quat.mul(y, alpha(t)))
    B = _march_group(x2, j0, lambda t, y: quat.mul(beta(t), y))
    C = M[i0, j0]

    Mr = quat.mul(B[None, :, :], quat.mul(C, A)[:, None, :])
    reconstruction = float(np.linalg.norm(M - Mr, axis=-1).max())
    return LieFactors(x1, x2, A, B, C, criterion, reconstruction)


def residual_suite(grid):
    """Worst-case structural residuals of the sampled immersion.

    Every quantity vanishes identically on an exact bilegendrian immersion:
    tangency of the derivatives to the contact planes, the two symplectic
    pullbacks, flatness of the pulled-back fiber metric 2(dx1^2 + dx2^2),
    unit speed along both axes, the two normal transport identities, the
    product criterion, and the structural entries of the cubic forms.
    Returns a dict of named maxima.
    """
    X, Y = grid.X, grid.Y
    d1X, d2X, d1Y, d2Y = parts = _partials(grid)
    out = {
        "tangency_dX_X": float(max(np.abs(_bdot(d1X, X)).max(), np.abs(_bdot(d2X, X)).max())),
        "tangency_dX_Y": float(max(np.abs(_bdot(d1X, Y)).max(), np.abs(_bdot(d2X, Y)).max())),
        "tangency_dY_X": float(max(np.abs(_bdot(d1Y, X)).max(), np.abs(_bdot(d2Y, X)).max())),
        "tangency_dY_Y": float(max(np.abs(_bdot(d1Y, Y)).max(), np.abs(_bdot(d2Y, Y)).max())),
    }
    out["omega_i"] = float(np.abs(_bdot(d1X, d2Y) - _bdot(d1Y, d2X)).max())
    Ad2X = _apply_A(X, Y, d2X)
    Ad2Y = _apply_A(X, Y, d2Y)
    out["omega_k"] = float(np.abs(_bdot(d1X, Ad2X) + _bdot(d1Y, Ad2Y)).max())
    g11 = _bdot(d1X, d1X) + _bdot(d1Y, d1Y)
    g22 = _bdot(d2X, d2X) + _bdot(d2Y, d2Y)
    g12 = _bdot(d1X, d2X) + _bdot(d1Y, d2Y)
    out["flat_metric"] = float(
        max(np.abs(g11 - 2.0).max(), np.abs(g22 - 2.0).max(), np.abs(g12).max())
    )
    out["unit_speed"] = float(
        max(
            np.abs(_bdot(d1X, d1X) - 1.0).max(),
            np.abs(_bdot(d2X, d2X) - 1.0).max(),
            np.abs(_bdot(d1Y, d1Y) - 1.0).max(),
            np.abs(_bdot(d2Y, d2Y) - 1.0).max(),
        )
    )
    # d1(Y conj(X)) = 0 and d2(conj(X) Y) = 0: the normal is transported
    left = quat.mul(d1Y, quat.conj(X)) + quat.mul(Y, quat.conj(d1X))
    right = quat.mul(quat.conj(d2X), Y) + quat.mul(quat.conj(X), d2Y)
    out["normal_transport"] = float(
        max(np.linalg.norm(left, axis=-1).max(), np.linalg.norm(right, axis=-1).max())
    )
    h1 = _uniform_step(grid.x1, "x1")
    h2 = _uniform_step(grid.x2, "x2")
    U = quat.mul(quat.conj(X), d1X)
    V = quat.mul(d2X, quat.conj(X))
    out["product_criterion"] = float(
        max(
            np.linalg.norm(_d_uniform(U, h2, 1), axis=-1).max(),
            np.linalg.norm(_d_uniform(V, h1, 0), axis=-1).max(),
        )
    )
    sec = _second_partials(grid, parts)
    c122 = _bdot(sec["12X"], d2Y) - _bdot(sec["12Y"], d2X)
    c211 = _bdot(sec["12X"], d1Y) - _bdot(sec["12Y"], d1X)
    out["cubic_122"] = float(np.abs(c122).max())
    out["cubic_211"] = float(np.abs(c211).max())
    chat = 0.0
    for lead in ("1", "2"):
        for diag, dX, dY in (("1", d1X, d1Y), ("2", d2X, d2Y)):
            key = lead + diag if lead <= diag else diag + lead
            entry = _bdot(sec[key + "X"], dY) + _bdot(sec[key + "Y"], dX)
            chat = max(chat, float(np.abs(entry).max()))
    out["cubic_hat"] = chat
    return out


def cubic_form_entries(grid):
    """Grids of the cubic form C and its conjugate on the coordinate fields.

    C(u, v, w) = b(du dv X, dw Y) - b(du dv Y, dw X) and the conjugate form
    negates the symmetrized combination.  Keys C111 ... C222 follow the index
    pattern (lead, diag, diag); Chat entries likewise.
    """
    d1X, d2X, d1Y, d2Y = parts = _partials(grid)
    sec = _second_partials(grid, parts)
    firsts = {"1": (d1X, d1Y), "2": (d2X, d2Y)}
    out = {}
    for u in ("1", "2"):
        for v in ("1", "2"):
            pair = u + v if u <= v else v + u
            for w in ("1", "2"):
                dX, dY = firsts[w]
                out["C" + u + v + w] = _bdot(sec[pair + "X"], dY) - _bdot(sec[pair + "Y"], dX)
    for lead in ("1", "2"):
        for diag in ("1", "2"):
            pair = lead + diag if lead <= diag else diag + lead
            dX, dY = firsts[diag]
            out["Chat" + lead + diag + diag] = -(
                _bdot(sec[pair + "X"], dY) + _bdot(sec[pair + "Y"], dX)
            )
    return out


@dataclass
class AngleData:
    """Angle function of an immersion and its split into one-variable parts.

    theta is the unwrapped grid; theta0 = 2 theta(0, 0) is the rotation
    invariant (well defined through exp(i theta0)); theta1 + theta2
    reproduces theta up to split_residual, with theta1(0) = theta2(0) =
    theta(0, 0) / 2.  dtheta1 and dtheta2 sample the two curvature
    potentials along the axes.  wave_residual bounds |d1 d2 theta| and
    frame_residual the defect of the diagonalizing tangent frame.
    """

    x1: np.ndarray
    x2: np.ndarray
    theta: np.ndarray
    theta0: float
    theta1: np.ndarray
    theta2: np.ndarray
    dtheta1: np.ndarray
    dtheta2: np.ndarray
    wave_residual: float
    split_residual: float
    frame_residual: float


def _propagate_sign(raw, i0, j0):
    """Sign grid making the raw unit field continuous along row j0, then columns."""
    n1, n2 = raw.shape[:2]
    sign = np.ones((n1, n2))
    row = raw[:, j0]
    rowdots = np.sum(row[1:] * row[:-1], axis=-1)
    coldots = np.sum(raw[:, 1:] * raw[:, :-1], axis=-1)
    worst = min(
        float(np.abs(rowdots).min()) if len(rowdots) else 1.0,
        float(np.abs(coldots).min()) if coldots.size else 1.0,
    )
    if worst < 0.1:
        raise PreconditionError(
            f"grid too coarse to propagate the tangent frame sign, overlap {worst:.3f}"
        )
    s_row = np.sign(rowdots)
    if i0 + 1 < n1:
        sign[i0 + 1:, j0] = np.cumprod(s_row[i0:])
    if i0 > 0:
        sign[i0 - 1::-1, j0] = np.cumprod(s_row[i0 - 1::-1])
    s_col = np.sign(coldots)
    if j0 + 1 < n2:
        sign[:, j0 + 1:] = sign[:, [j0]] * np.cumprod(s_col[:, j0:], axis=1)
    if j0 > 0:
        sign[:, j0 - 1::-1] = sign[:, [j0]] * np.cumprod(s_col[:, j0 - 1::-1], axis=1)
    return sign


def angle_function(grid):
    """Extract the angle function theta of the immersion.

    The symmetrized derivative (d1 + d2)/2 of the pair (X, Y) equals
    (cos(theta) e1, sin(theta) e1) for a unit tangent field e1; theta is read
    off nodewise, the sign of e1 is fixed at the origin and propagated by
    continuity, and the branch is unwrapped along the origin row and then
    along every column.
    """
    i0, j0 = grid.origin()
    d1X, d2X, d1Y, d2Y = _partials(grid)
    U = 0.5 * (d1X + d2X)
    V = 0.5 * (d1Y + d2Y)
    nu = np.linalg.norm(U, axis=-1)
    nv = np.linalg.norm(V, axis=-1)
    if np.any(np.maximum(nu, nv) < 1e-8):
        raise PreconditionError("angle frame undefined: both derivative components vanish")
    pick = nu >= nv
    raw = np.where(
        pick[..., None],
        U / np.maximum(nu, 1e-300)[..., None],
        V / np.maximum(nv, 1e-300)[..., None],
    )

    sign = _propagate_sign(raw, i0, j0)
    e1 = sign[..., None] * raw
    c = _bdot(U, e1)
    s = _bdot(V, e1)
    theta = np.arctan2(s, c)

    row = theta[:, j0].copy()
    theta[i0:, j0] = np.unwrap(row[i0:])
    theta[i0::-1, j0] = np.unwrap(row[i0::-1])
    theta[:, j0:] = np.unwrap(theta[:, j0:], axis=1)
    theta[:, j0::-1] = np.unwrap(theta[:, j0::-1], axis=1)

    e2 = _apply_A(grid.X, grid.Y, e1)
    cs, sn = np.cos(theta)[..., None], np.sin(theta)[..., None]
    recon = max(
        float(np.linalg.norm(d1X - (cs * e1 - sn * e2), axis=-1).max()),
        float(np.linalg.norm(d1Y - (sn * e1 + cs * e2), axis=-1).max()),
        float(np.linalg.norm(d2X - (cs * e1 + sn * e2), axis=-1).max()),
        float(np.linalg.norm(d2Y - (sn * e1 - cs * e2), axis=-1).max()),
    )
    framed = np.stack([grid.X, e1, e2, grid.Y], axis=-1)
    det = np.linalg.det(framed)
    frame_residual = max(recon, float(np.abs(det - 1.0).max()))

    h1 = _uniform_step(grid.x1, "x1")
    h2 = _uniform_step(grid.x2, "x2")
    d1theta = _d_uniform(theta, h1, 0)
    wave = float(np.abs(_d_uniform(d1theta, h2, 1)).max())

    theta00 = float(theta[i0, j0])
    theta1 = theta[:, j0] - 0.5 * theta00
    theta2 = theta[i0, :] - 0.5 * theta00
    split = float(np.abs(theta - theta1[:, None] - theta2[None, :]).max())
    return AngleData(
        x1=grid.x1,
        x2=grid.x2,
        theta=theta,
        theta0=2.0 * theta00,
        theta1=theta1,
        theta2=theta2,
        dtheta1=d1theta[:, j0],
        dtheta2=_d_uniform(theta, h2, 1)[i0, :],
        wave_residual=wave,
        split_residual=split,
        frame_residual=frame_residual,
    )


@dataclass
class FramedCurve:
    """Frenet data of the restriction of the immersion to a coordinate axis.

    The frame columns are (gamma, T, N, B) with T the axis velocity of X,
    N the quarter turn of T, and B the restriction of Y.  kappa = b(T', N)
    and tau = b(N', B); tridiagonal_residual bounds |b(T', B)|, and the
    residuals record |tau + eps| and |kappa + 2 eps dtheta|.
    """

    t: np.ndarray
    gamma: np.ndarray
    T: np.ndarray
    N: np.ndarray
    B: np.ndarray
    kappa: np.ndarray
    tau: np.ndarray
    eps: float
    tridiagonal_residual: float
    tau_residual: float
    kappa_residual: float


def asymptotic_frame(grid, index, angle=None, tol=1e-6):
    """Frenet frame of the asymptotic curve along the x1 or x2 axis.

    index selects the axis (1 or 2).  The frame must be tridiagonal,
    b(T', B) = 0, up to tol; the torsion must equal -eps and the curvature
    -2 eps dtheta, which ties the frame to the angle data (computed on
    demand when not supplied).
    """
    if index not in (1, 2):
        raise ValidationError("index must be 1 or 2")
    if angle is None:
        angle = angle_function(grid)
    i0, j0 = grid.origin()
    d1X, d2X, _, _ = _partials(grid)
    if index == 1:
        t = grid.x1
        gam = grid.X[:, j0]
        T = d1X[:, j0]
        B = grid.Y[:, j0]
        eps = EPS1
        dtheta = angle.dtheta1
    else:
        t = grid.x2
        gam = grid.X[i0, :]
        T = d2X[i0, :]
        B = grid.Y[i0, :]
        eps = EPS2
        dtheta = angle.dtheta2
    N = quat.mul(B, quat.mul(quat.conj(gam), T))
    h = _uniform_step(t, f"x{index}")
    Tdot = _d_uniform(T, h, 0)
    Ndot = _d_uniform(N, h, 0)
    trid = float(np.abs(_bdot(Tdot, B)).max())
    if trid > tol:
        raise PreconditionError(
            f"the axis restriction is not a framed curve, b(T', B) residual {trid:.3e}"
        )
    kappa = _bdot(Tdot, N)
    tau = _bdot(Ndot, B)
    tau_residual = float(np.abs(tau + eps).max())
    kappa_residual = float(np.abs(kappa + 2.0 * eps * dtheta).max())
    if tau_residual > 1e-3 or kappa_residual > 1e-3:
        raise PreconditionError(
            f"frame invariants are off: |tau + eps| = {tau_residual:.3e}, "
            f"|kappa + 2 eps dtheta| = {kappa_residual:.3e}"
        )
    return FramedCurve(
        t=t, gamma=gam, T=T, N=N, B=B, kappa=kappa, tau=tau, eps=eps,
        tridiagonal_residual=trid, tau_residual=tau_residual,
        kappa_residual=kappa_residual,
    )


def _frenet_omega(kappa, tau):
    return np.array(
        [
            [0.0, -1.0, 0.0, 0.0],
            [1.0, 0.0, -kappa, 0.0],
            [0.0, kappa, 0.0, -tau],
            [0.0, 0.0, tau, 0.0],
        ]
    )


def _renorm_frame(F):
    Q, R = np.linalg.qr(F)
    return Q * np.sign(np.diag(R))


def _integrate_frenet(kappa_fn, tau, F0, t_lo, t_hi, step):
    """Solve F' = F Omega(t) from t = 0 both ways; returns (ts, gamma, T) samples."""

    def run(t_end):
        n = max(1, math.ceil(abs(t_end) / step))
        ts = np.linspace(0.0, t_end, n + 1)
        out = np.empty((n + 1, 4, 4))
        F = F0.copy()
        out[0] = F
        for idx in range(n):
            t, h = ts[idx], ts[idx + 1] - ts[idx]
            k1 = F @ _frenet_omega(kappa_fn(t), tau)
            F2 = F + 0.5 * h * k1
            k2 = F2 @ _frenet_omega(kappa_fn(t + 0.5 * h), tau)
            F3 = F + 0.5 * h * k2
            k3 = F3 @ _frenet_omega(kappa_fn(t + 0.5 * h), tau)
            F4 = F + h * k3
            k4 = F4 @ _frenet_omega(kappa_fn(t + h), tau)
            F = _renorm_frame(F + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
            out[idx + 1] = F
        return ts, out

    ts_f, F_f = run(t_hi) if t_hi > 0 else (np.zeros(1), F0[None])
    ts_b, F_b = run(t_lo) if t_lo < 0 else (np.zeros(1), F0[None])
    ts = np.concatenate([ts_b[:0:-1], ts_f])
    frames = np.concatenate([F_b[:0:-1], F_f])
    return ts, frames[:, :, 0], frames[:, :, 1]


def from_theta(theta0, f, g, x1, x2, step=1e-3):
    """Build the immersion classified by (exp(i theta0), f, g).

    f and g are the curvature potentials d1 theta(., 0) and d2 theta(0, .).
    The first factor solves the framed curve system with kappa = -2 f and
    tau = -1 from the identity frame; the second uses kappa = 2 g, tau = +1,
    and the initial direction rotated by theta0 about the last imaginary
    axis.  Both are splined and assembled with a = 1, b = k.
    """
    x1 = _axis_array(x1, "x1")
    x2 = _axis_array(x2, "x2")
    margin = 2.0 * max(step, 1e-4)
    lo1, hi1 = min(float(x1[0]), 0.0) - margin, max(float(x1[-1]), 0.0) + margin
    lo2, hi2 = min(float(x2[0]), 0.0) - margin, max(float(x2[-1]), 0.0) + margin

    F0_1 = np.eye(4)
    v2 = np.array([0.0, math.cos(theta0), math.sin(theta0), 0.0])
    F0_2 = np.stack([quat.ONE, v2, quat.mul(quat.QK, v2), quat.QK], axis=-1)

    ts1, G1, T1 = _integrate_frenet(lambda t: -2.0 * f(t), -1.0, F0_1, lo1, hi1, step)
    ts2, G2, T2 = _integrate_frenet(lambda t: 2.0 * g(t), 1.0, F0_2, lo2, hi2, step)
    spl_g1, spl_t1 = CubicSpline(ts1, G1), CubicSpline(ts1, T1)
    spl_g2, spl_t2 = CubicSpline(ts2, G2), CubicSpline(ts2, T2)
    return construct(
        quat.ONE, quat.QK, spl_g1, spl_g2, x1, x2,
        dgamma1=spl_t1, dgamma2=spl_t2,
        t1_range=(lo1, hi1), t2_range=(lo2, hi2),
    )


def projection_immersion_test(angle, tol=1e-9):
    """Whether the first-component projection of the surface is an immersion.

    The projection degenerates exactly where theta meets a multiple of
    pi / 2; the margin is the distance of the sampled angle range to that
    set, and the test passes when it stays positive.
    """
    quarter = 0.5 * math.pi
    dist = np.abs((angle.theta + 0.5 * quarter) % quarter - 0.5 * quarter)
    margin = float(dist.min())
    return margin > tol, margin


@dataclass
class PeriodLattice:
    """Maximal period lattice {(m p1, n p2) : m q1 - n q2 integer}.

    q1 and q2 are the snapped rational fiber rotation numbers of the two
    factors about their horizontality axes; the measured floats are kept
    alongside.
    """

    p1: float
    p2: float
    q1: Fraction
    q2: Fraction
    q1_measured: float
    q2_measured: float
    axis1: np.ndarray
    axis2: np.ndarray
    rule_residual: float = 0.0

    def contains(self, m, n):
        return (Fraction(m) * self.q1 - Fraction(n) * self.q2).denominator == 1


@dataclass
class NoLattice:
    """Measured fiber rotation data that fails to close into a period lattice."""

    q1_measured: float
    q2_measured: float
    reason: str


def _snap_rational(value, limit, tol):
    frac = Fraction(value).limit_denominator(limit)
    if abs(float(frac) - value) > tol:
        return None
    return frac % 1


def _holonomy_about(element, axis_vec, tol):
    """Angle of a fiber circle element about the axis; None when off the circle."""
    real = float(element[0])
    along = float(np.dot(element[1:], axis_vec))
    off = float(np.linalg.norm(element[1:] - along * axis_vec))
    if off > tol:
        return None, off
    return math.atan2(along, real), off


def torus_ansatz(a, b, c1, c2, n1=65, n2=65, step=1e-3,
                 denominator_limit=64, snap_tol=1e-6):
    """Construct a candidate doubly-periodic immersion from two closed curves.

    c1 and c2 are closed spherical curves, arc-length parametrized in the
    quarter-metric, starting at the conjugated axes: c1(0) = vec(conj(a).b)
    and c2(0) = vec(conj(b).a).  Their horizontal lifts through the identity
    are the factor curves; the periods are the curve lengths, and the fiber
    rotation numbers are measured from the lift holonomies.  Returns the
    grid over one fundamental rectangle together with the PeriodLattice, or
    a NoLattice report when the rotation numbers fail to snap to rationals.
    """
    a = _as_unit_quat(a, "a")
    b = _as_unit_quat(b, "b")
    if abs(float(np.dot(a, b))) > 1e-9:
        raise PreconditionError("a and b must be orthogonal")
    xi1 = quat.mul(quat.conj(a), b)
    xi2 = quat.mul(quat.conj(b), a)
    for name, curve, xi in (("c1", c1, xi1), ("c2", c2, xi2)):
        if not curve.closed:
            raise PreconditionError(f"{name} must be a closed curve")
        if abs(float(curve.params[0])) > 1e-12:
            raise ValidationError(f"{name} must be parametrized from 0")
        gap = float(np.linalg.norm(curve.samples[0] - _vec(xi)))
        if gap > 1e-6:
            raise PreconditionError(
                f"{name}(0) must be the conjugated axis, offset {gap:.3e}"
            )

    lift1 = sphere.horizontal_lift(c1, _vec(xi1), "right", quat.ONE, step=step)
    lift2 = sphere.horizontal_lift(c2, _vec(xi2), "left", quat.ONE, step=step)
    p1 = float(lift1.params[-1])
    p2 = float(lift2.params[-1])
    h1 = sphere.holonomy(lift1, p1)
    h2 = sphere.holonomy(lift2, p2)
    q1 = (-h1.q) % 1.0
    q2 = (-h2.q) % 1.0

    spl1 = CubicSpline(lift1.params, lift1.samples)
    spl2 = CubicSpline(lift2.params, lift2.samples)
    x1 = np.linspace(0.0, p1, n1)
    x2 = np.linspace(0.0, p2, n2)
    grid = construct(
        a, b, spl1, spl2, x1, x2,
        dgamma1=spl1.derivative(), dgamma2=spl2.derivative(),
        t1_range=(0.0, p1), t2_range=(0.0, p2),
    )

    s1 = _snap_rational(q1, denominator_limit, snap_tol)
    s2 = _snap_rational(q2, denominator_limit, snap_tol)
    if s1 is None or s2 is None:
        lattice = NoLattice(
            q1, q2,
            reason=f"fiber rotation numbers do not snap to rationals with "
                   f"denominator at most {denominator_limit}",
        )
    else:
        lattice = PeriodLattice(
            p1=p1, p2=p2, q1=s1, q2=s2, q1_measured=q1, q2_measured=q2,
            axis1=_vec(xi1).copy(), axis2=_vec(quat.mul(b, quat.conj(a))).copy(),
        )
    return grid, lattice


def _detect_period(curve_fn, lo, hi, tol=1e-6):
    """Smallest period of a sampled closed curve whose span is a whole multiple of it."""
    ts = np.linspace(lo, hi, 1024)
    C = curve_fn(ts)
    if np.linalg.norm(C[-1] - C[0]) > 1e-6:
        raise NoMaximalLattice(
            "the projected factor does not close over the sampled domain; "
            "pass the period explicitly"
        )
    span = hi - lo
    best = span
    for k in range(2, 9):
        p = span / k
        probe = np.linspace(lo, hi - p, 257)
        gap = np.linalg.norm(curve_fn(probe + p) - curve_fn(probe), axis=-1).max()
        if gap < max(tol, 1e-6):
            best = min(best, p)
    return best


def period_lattice(factors, p1=None, p2=None, tol=1e-6,
                   denominator_limit=64, snap_tol=1e-6):
    """Period lattice of a doubly-periodic product immersion.

    The factor curves are quasiperiodic over the periods p1, p2 of their
    Hopf projections (detected from the factor domains when not supplied):
    gamma1 picks up the left multiplier exp(-2 pi q1 conj(a) b) and gamma2
    the right multiplier exp(2 pi q2 b conj(a)).  The rotation numbers are
    snapped to rationals and the divisibility rule m q1 - n q2 integer is
    verified against the holonomy algebra; failures raise NoMaximalLattice.
    """
    a, b = factors.a, factors.b
    xi1 = quat.mul(quat.conj(a), b)
    xi2 = quat.mul(b, quat.conj(a))
    w1 = _vec(xi1) / np.linalg.norm(_vec(xi1))
    w2 = _vec(xi2) / np.linalg.norm(_vec(xi2))

    rng1 = factors.t1_range or (0.0, _TWO_PI)
    rng2 = factors.t2_range or (0.0, _TWO_PI)
    if p1 is None:
        p1 = _detect_period(
            lambda t: sphere.hopf(w1, "right", _eval_curve(factors.gamma1, t)),
            rng1[0], rng1[1], tol,
        )
    if p2 is None:
        p2 = _detect_period(
            lambda t: sphere.hopf(w2, "left", _eval_curve(factors.gamma2, t)),
            rng2[0], rng2[1], tol,
        )
    if p1 <= 0 or p2 <= 0:
        raise ValidationError("periods must be positive")

    E1 = quat.normalize(_eval_curve(factors.gamma1, np.array([p1]))[0])
    E2 = quat.normalize(_eval_curve(factors.gamma2, np.array([p2]))[0])
    psi1, off1 = _holonomy_about(E1, w1, 10.0 * tol)
    psi2, off2 = _holonomy_about(E2, w2, 10.0 * tol)
    if psi1 is None or psi2 is None:
        raise NoMaximalLattice(
            f"a factor holonomy element lies off its fiber circle "
            f"(offsets {off1:.3e}, {off2:.3e}); the factors are not quasiperiodic "
            "about the product axes"
        )
    q1 = (-psi1 / _TWO_PI) % 1.0
    q2 = (psi2 / _TWO_PI) % 1.0

    # quasiperiodic displacement check inside the trusted domains
    worst = 0.0
    if rng1[1] - rng1[0] > p1 + 1e-9:
        ts = np.linspace(rng1[0], rng1[1] - p1, 9)
        shift = _eval_curve(factors.gamma1, ts + p1)
        pred = quat.mul(E1, _eval_curve(factors.gamma1, ts))
        worst = max(worst, float(np.linalg.norm(shift - pred, axis=-1).max()))
    if rng2[1] - rng2[0] > p2 + 1e-9:
        ts = np.linspace(rng2[0], rng2[1] - p2, 9)
        shift = _eval_curve(factors.gamma2, ts + p2)
        pred = quat.mul(_eval_curve(factors.gamma2, ts), E2)
        worst = max(worst, float(np.linalg.norm(shift - pred, axis=-1).max()))
    if worst > 100.0 * tol:
        raise NoMaximalLattice(
            f"the factors are not quasiperiodic over ({p1:.6g}, {p2:.6g}): "
            f"displacement residual {worst:.3e}"
        )

    s1 = _snap_rational(q1, denominator_limit, snap_tol)
    s2 = _snap_rational(q2, denominator_limit, snap_tol)
    if s1 is None or s2 is None:
        raise NoMaximalLattice(
            f"fiber rotation numbers ({q1:.8f}, {q2:.8f}) do not snap to rationals "
            f"with denominator at most {denominator_limit}"
        )

    # the divisibility rule must reproduce exact translations of the pair (a, b)
    rule_residual = 0.0
    snap_err = max(abs(float(s1) - q1), abs(float(s2) - q2))
    for m in range(-8, 9):
        for n in range(-8, 9):
            if (Fraction(m) * s1 - Fraction(n) * s2).denominator != 1:
                continue
            E1m = quat.exp_im(quat.from_vec3(m * psi1 * w1))
            E2n = quat.exp_im(quat.from_vec3(n * psi2 * w2))
            res = max(
                float(np.linalg.norm(quat.mul(E2n, quat.mul(a, E1m)) - a)),
                float(np.linalg.norm(quat.mul(E2n, quat.mul(b, E1m)) - b)),
            )
            allowance = 100.0 * tol + 4.0 * math.pi * (abs(m) + abs(n)) * snap_err
            if res > allowance:
                raise NoMaximalLattice(
                    f"lattice candidate ({m}, {n}) fails the translation check "
                    f"with residual {res:.3e}"
                )
            rule_residual = max(rule_residual, res)

    return PeriodLattice(
        p1=float(p1), p2=float(p2), q1=s1, q2=s2,
        q1_measured=q1, q2_measured=q2,
        axis1=w1, axis2=w2, rule_residual=rule_residual,
    )


@dataclass
class GaussMapData:
    """Factorized Gauss map into a product of two spheres.

    The normal plane at (x1, x2) is spanned by X and Y; in the product
    picture it factorizes through the pair m, n solving a = m j conj(n),
    b = m k conj(n), as the separate spherical curves
    from_gamma2(x2) = pi(gamma2 m) and from_gamma1(x1) = pi(conj(gamma1) n)
    under the Hopf projection pi about the first imaginary axis.
    """

    m: np.ndarray
    n: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    from_gamma1: np.ndarray
    from_gamma2: np.ndarray
    equation_residual: float


def gauss_map(factors, x1=None, x2=None, samples=257):
    """Factor the Gauss map of a product immersion through two circles of spheres.

    The pair (m, n) is chosen deterministically: n is the minimal rotation
    taking the first imaginary axis to -vec(conj(a).b), and m = a n conj(j)
    then solves both defining equations.
    """
    i_axis = np.array([1.0, 0.0, 0.0])
    ab = quat.mul(quat.conj(factors.a), factors.b)
    n_q = sphere.hopf_preimage(i_axis, -_vec(ab), "left")
    m_q = -quat.mul(factors.a, quat.mul(n_q, quat.QJ))
    res = max(
        float(np.linalg.norm(factors.a - quat.mul(m_q, quat.mul(quat.QJ, quat.conj(n_q))))),
        float(np.linalg.norm(factors.b - quat.mul(m_q, quat.mul(quat.QK, quat.conj(n_q))))),
    )
    if x1 is None:
        rng = factors.t1_range or (0.0, _TWO_PI)
        x1 = np.linspace(rng[0], rng[1], samples)
    else:
        x1 = _axis_array(x1, "x1")
    if x2 is None:
        rng = factors.t2_range or (0.0, _TWO_PI)
        x2 = np.linspace(rng[0], rng[1], samples)
    else:
        x2 = _axis_array(x2, "x2")
    G1 = _eval_curve(factors.gamma1, x1)
    G2 = _eval_curve(factors.gamma2, x2)
    from_gamma1 = sphere.hopf(i_axis, "left", quat.mul(quat.conj(G1), n_q))
    from_gamma2 = sphere.hopf(i_axis, "left", quat.mul(G2, m_q))
    return GaussMapData(
        m=m_q, n=n_q, x1=x1, x2=x2,
        from_gamma1=from_gamma1, from_gamma2=from_gamma2,
        equation_residual=res,
    )


@dataclass
class FlatTorusReport:
    """Criteria for a doubly-periodic immersion to project to a flat torus.

    The projection is an immersed flat torus exactly when the angle misses
    the multiples of pi / 2 (margin positive), the fiber rotation numbers
    are 0 or 1/2, and the factor curvatures integrate to zero over their
    periods.
    """

    kappa1_integral: float
    kappa2_integral: float
    q1: Fraction
    q2: Fraction
    half_integer_rotations: bool
    immersed: bool
    margin: float
    satisfied: bool


def flat_torus_criteria(grid, lattice, tol=1e-5):
    """Evaluate the flat-torus criteria of a doubly-periodic immersion."""
    if not isinstance(lattice, PeriodLattice):
        raise ValidationError("flat_torus_criteria needs a PeriodLattice")
    angle = angle_function(grid)
    fr1 = asymptotic_frame(grid, 1, angle)
    fr2 = asymptotic_frame(grid, 2, angle)
    for t, p, name in ((fr1.t, lattice.p1, "x1"), (fr2.t, lattice.p2, "x2")):
        if t[0] > 1e-9 or t[-1] < p - 1e-9:
            raise ValidationError(f"the {name} range must cover one full period [0, p]")
    k1 = float(CubicSpline(fr1.t, fr1.kappa).integrate(0.0, lattice.p1))
    k2 = float(CubicSpline(fr2.t, fr2.kappa).integrate(0.0, lattice.p2))
    half = (2 * lattice.q1).denominator == 1 and (2 * lattice.q2).denominator == 1
    immersed, margin = projection_immersion_test(angle)
    satisfied = half and immersed and max(abs(k1), abs(k2)) <= max(tol, 1e-8)
    return FlatTorusReport(
        kappa1_integral=k1, kappa2_integral=k2,
        q1=lattice.q1, q2=lattice.q2,
        half_integer_rotations=half, immersed=immersed, margin=margin,
        satisfied=satisfied,
    )
