"""Support surface as a graph patch with its tubular-neighborhood chart.

The support surface sits in ambient coordinates (x1, x2, x3) as the graph
x2 = phi(x1, x3) through the origin, with unit inward normal (0, 1, 0) at
the base point.  Chart coordinates are Y = (y1, y2, y3): (y1, y3) are
tangent coordinates of the projection onto the surface and y2 is the signed
distance (positive on the inside).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartRangeError, NewtonConvergenceError, SingularMetricError

# tangent slot a -> chart index (y1, y3)
_TANGENT_IDX = (0, 2)


# ---------------------------------------------------------------------------
# Height profiles phi(y1, y3) with derivatives up to third order
# ---------------------------------------------------------------------------

class FlatProfile:
    """phi == 0."""

    name = "flat"

    def derivs(self, p, q):
        p = np.asarray(p, dtype=float)
        z = np.zeros_like(p)
        shape = p.shape
        return (
            z,
            np.zeros(shape + (2,)),
            np.zeros(shape + (2, 2)),
            np.zeros(shape + (2, 2, 2)),
        )


class ParaboloidProfile:
    """phi = a * y1**2 / 2 (a cylinder-like parabolic trough)."""

    def __init__(self, a):
        self.a = float(a)
        self.name = f"paraboloid:{self.a:g}"

    def derivs(self, p, q):
        p = np.asarray(p, dtype=float)
        shape = p.shape
        a = self.a
        phi = 0.5 * a * p**2
        d1 = np.zeros(shape + (2,))
        d1[..., 0] = a * p
        d2 = np.zeros(shape + (2, 2))
        d2[..., 0, 0] = a
        d3 = np.zeros(shape + (2, 2, 2))
        return phi, d1, d2, d3


class SphereCapProfile:
    """phi = R - sqrt(R**2 - y1**2 - y3**2): sphere of radius R seen from inside."""

    def __init__(self, R):
        self.R = float(R)
        self.name = f"sphere_cap:{self.R:g}"

    def derivs(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        R = self.R
        w2 = R**2 - p**2 - q**2
        if np.any(w2 <= 0.0):
            raise ChartRangeError("sphere-cap profile evaluated outside its disk")
        w = np.sqrt(w2)
        y = np.stack([p, q], axis=-1)
        phi = R - w
        d1 = y / w[..., None]
        eye = np.eye(2)
        d2 = eye / w[..., None, None] + (
            y[..., :, None] * y[..., None, :] / (w**3)[..., None, None]
        )
        # d3_{abc} = (delta_ab y_c + delta_ac y_b + delta_bc y_a)/w^3 + 3 y_a y_b y_c / w^5
        d3 = (
            eye[None, ...][..., :, :, None] * y[..., None, None, :]
            + eye[..., :, None, :] * y[..., None, :, None]
            + eye[..., None, :, :] * y[..., :, None, None]
        ) / (w**3)[..., None, None, None] + 3.0 * (
            y[..., :, None, None] * y[..., None, :, None] * y[..., None, None, :]
        ) / (w**5)[..., None, None, None]
        return phi, d1, d2, d3


class SampledProfile:
    """Height samples on a uniform lattice, interpolated by a quintic spline."""

    def __init__(self, x_axis, z_axis, values):
        from scipy.interpolate import RectBivariateSpline

        self.x_axis = np.asarray(x_axis, dtype=float)
        self.z_axis = np.asarray(z_axis, dtype=float)
        self.values = np.asarray(values, dtype=float)
        self._spline = RectBivariateSpline(self.x_axis, self.z_axis, self.values, kx=5, ky=5)
        self.name = "sampled"

    def derivs(self, p, q):
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        shape = p.shape
        sp = self._spline

        def ev(dx, dz):
            return sp.ev(p.ravel(), q.ravel(), dx=dx, dz=dz).reshape(shape)

        phi = ev(0, 0)
        d1 = np.stack([ev(1, 0), ev(0, 1)], axis=-1)
        d2 = np.empty(shape + (2, 2))
        d2[..., 0, 0] = ev(2, 0)
        d2[..., 0, 1] = d2[..., 1, 0] = ev(1, 1)
        d2[..., 1, 1] = ev(0, 2)
        d3 = np.empty(shape + (2, 2, 2))
        d3[..., 0, 0, 0] = ev(3, 0)
        v110 = ev(2, 1)
        v011 = ev(1, 2)
        d3[..., 0, 0, 1] = d3[..., 0, 1, 0] = d3[..., 1, 0, 0] = v110
        d3[..., 0, 1, 1] = d3[..., 1, 0, 1] = d3[..., 1, 1, 0] = v011
        d3[..., 1, 1, 1] = ev(0, 3)
        return phi, d1, d2, d3


class ScaledProfile:
    """phi^lam(y) = phi(lam*y)/lam, the profile of Gamma/lam."""

    def __init__(self, base, lam):
        self.base = base
        self.lam = float(lam)
        self.name = f"{base.name}@/{self.lam:g}"

    def derivs(self, p, q):
        lam = self.lam
        phi, d1, d2, d3 = self.base.derivs(lam * np.asarray(p, float), lam * np.asarray(q, float))
        return phi / lam, d1, lam * d2, lam**2 * d3


# ---------------------------------------------------------------------------
# Patch
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SupportPatch:
    """A kappa-graph patch of the support surface, base point at the origin.

    The orientation frame is fixed: base point O = 0 and nu(O) = (0, 1, 0).
    """

    kind: str
    profile: object
    kappa: float
    chart_radius: float

    def __post_init__(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.kappa == 0 and self.kind != "flat":
            raise ValueError("kappa = 0 is only admitted for flat patches")
        if self.kappa > 0 and self.chart_radius > 1.0 / self.kappa + 1e-12:
            raise ValueError("chart_radius must be <= 1/kappa")

    # -- constructors -------------------------------------------------------

    @classmethod
    def flat(cls, chart_radius=10.0):
        return cls("flat", FlatProfile(), 0.0, chart_radius)

    @classmethod
    def paraboloid(cls, a, kappa=None, chart_radius=None):
        kappa = float(abs(a)) if kappa is None else float(kappa)
        if chart_radius is None:
            chart_radius = 1.0 / kappa
        return cls("analytic-quadric", ParaboloidProfile(a), kappa, chart_radius)

    @classmethod
    def sphere_cap(cls, R, kappa=None, chart_radius=None):
        kappa = 1.0 / float(R) if kappa is None else float(kappa)
        if chart_radius is None:
            chart_radius = min(1.0 / kappa, 0.9 * float(R))
        return cls("analytic-quadric", SphereCapProfile(R), kappa, chart_radius)

    @classmethod
    def from_samples(cls, x_axis, z_axis, values, kappa, chart_radius):
        return cls("sampled", SampledProfile(x_axis, z_axis, values), kappa, chart_radius)

    @classmethod
    def from_spec(cls, phi_name, kappa=None, chart_radius=None):
        """Catalog lookup: 'flat', 'paraboloid:a', 'sphere_cap:R'."""
        if phi_name == "flat":
            return cls.flat(10.0 if chart_radius is None else chart_radius)
        if ":" in phi_name:
            base, arg = phi_name.split(":", 1)
            val = float(arg)
            if base == "paraboloid":
                return cls.paraboloid(val, kappa=kappa, chart_radius=chart_radius)
            if base == "sphere_cap":
                return cls.sphere_cap(val, kappa=kappa, chart_radius=chart_radius)
        raise ValueError(f"unknown phi catalog entry: {phi_name!r}")

    # -- basic properties ---------------------------------------------------

    @property
    def is_flat(self):
        return self.kind == "flat"

    def rescale(self, lam):
        """The patch of Gamma/lam; satisfies the (lam*kappa)-graph condition."""
        lam = float(lam)
        if self.is_flat:
            return SupportPatch("flat", FlatProfile(), 0.0, self.chart_radius / lam)
        return SupportPatch(
            self.kind, ScaledProfile(self.profile, lam), lam * self.kappa, self.chart_radius / lam
        )


# ---------------------------------------------------------------------------
# Chart evaluation
# ---------------------------------------------------------------------------

def _check_range(patch, Y):
    r = np.linalg.norm(Y, axis=-1)
    if np.any(r >= patch.chart_radius):
        raise ChartRangeError(
            f"chart point |Y| = {float(np.max(r)):g} outside radius {patch.chart_radius:g}"
        )


def chart_frames(patch, Y, order=2, check=True):
    """Evaluate Phi and its derivatives at chart points Y of shape (..., 3).

    Returns a dict with keys 'X' (..., 3), 'dPhi' (..., 3, i) and, for
    order >= 2, 'd2Phi' (..., 3, i, j), where the last axes index chart
    directions.
    """
    Y = np.asarray(Y, dtype=float)
    if check:
        _check_range(patch, Y)
    p, d, q = Y[..., 0], Y[..., 1], Y[..., 2]
    phi, g1, g2, g3 = patch.profile.derivs(p, q)
    shape = p.shape

    n = np.zeros(shape + (3,))
    n[..., 0] = -g1[..., 0]
    n[..., 1] = 1.0
    n[..., 2] = -g1[..., 1]
    W = np.linalg.norm(n, axis=-1)
    nu = n / W[..., None]

    # dn[..., comp, a], tangent slot a in {0,1} ~ chart (y1, y3)
    dn = np.zeros(shape + (3, 2))
    dn[..., 0, :] = -g2[..., 0, :]
    dn[..., 2, :] = -g2[..., 1, :]
    n_dn = np.einsum("...c,...ca->...a", n, dn)
    dW = n_dn / W[..., None]
    dnu = dn / W[..., None, None] - n[..., :, None] * (dW / W[..., None] ** 2)[..., None, :]

    c = np.stack([p, phi, q], axis=-1)
    dc = np.zeros(shape + (3, 2))
    dc[..., 0, 0] = 1.0
    dc[..., 2, 1] = 1.0
    dc[..., 1, :] = g1

    X = c + d[..., None] * nu
    dPhi = np.zeros(shape + (3, 3))
    for a, ia in enumerate(_TANGENT_IDX):
        dPhi[..., :, ia] = dc[..., :, a] + d[..., None] * dnu[..., :, a]
    dPhi[..., :, 1] = nu

    out = {"X": X, "dPhi": dPhi, "nu": nu, "phi": phi}
    if order < 2:
        return out

    ddn = np.zeros(shape + (3, 2, 2))
    ddn[..., 0, :, :] = -g3[..., 0, :, :]
    ddn[..., 2, :, :] = -g3[..., 1, :, :]
    ddW = (
        np.einsum("...ca,...cb->...ab", dn, dn) + np.einsum("...c,...cab->...ab", n, ddn)
    ) / W[..., None, None] - n_dn[..., :, None] * n_dn[..., None, :] / (W**3)[..., None, None]
    ddnu = (
        ddn / W[..., None, None, None]
        - dn[..., :, None, :] * (dW / W[..., None] ** 2)[..., None, :, None]
        - dn[..., :, :, None] * (dW / W[..., None] ** 2)[..., None, None, :]
        - n[..., :, None, None] * (ddW / W[..., None, None] ** 2)[..., None, :, :]
        + 2.0
        * n[..., :, None, None]
        * (dW[..., :, None] * dW[..., None, :] / (W**3)[..., None, None])[..., None, :, :]
    )

    d2Phi = np.zeros(shape + (3, 3, 3))
    for a, ia in enumerate(_TANGENT_IDX):
        for b, ib in enumerate(_TANGENT_IDX):
            d2Phi[..., :, ia, ib] = d[..., None] * ddnu[..., :, a, b]
            d2Phi[..., 1, ia, ib] += g2[..., a, b]
        d2Phi[..., :, ia, 1] = dnu[..., :, a]
        d2Phi[..., :, 1, ia] = dnu[..., :, a]
    out["d2Phi"] = d2Phi
    return out


def tubular_map(patch, Y):
    """Phi(Y) = (y1, phi(y1,y3), y3) + y2 * nu(y1, y3)."""
    if patch.is_flat:
        Y = np.asarray(Y, dtype=float)
        _check_range(patch, Y)
        return Y.copy()
    return chart_frames(patch, Y, order=1)["X"]


def chart_coords(patch, X, tol_factor=1e-12, max_iter=50):
    """Invert the tubular map by Newton iteration, seeded at Y = X."""
    X = np.asarray(X, dtype=float)
    if patch.is_flat:
        _check_range(patch, X)
        return X.copy()
    Y = X.copy()
    tol = tol_factor * patch.chart_radius
    for _ in range(max_iter):
        fr = chart_frames(patch, Y, order=1)
        res = fr["X"] - X
        if np.max(np.linalg.norm(res, axis=-1)) <= tol:
            return Y
        Y = Y - np.linalg.solve(fr["dPhi"], res[..., None])[..., 0]
    raise NewtonConvergenceError("tubular-map inversion did not converge in 50 steps")


def project_and_distance(patch, X):
    """Projection onto the surface, signed distance, and distance gradient.

    The distance is signed: positive on the inside (y2 > 0), negative
    outside.  The gradient is nu evaluated at the projection.
    """
    Y = chart_coords(patch, X)
    Yp = Y.copy()
    Yp[..., 1] = 0.0
    fr = chart_frames(patch, Yp, order=1)
    return fr["X"], Y[..., 1], fr["nu"]


def reflect(patch, X):
    """Reflection across the support surface: 2*projection - X."""
    proj, _, _ = project_and_distance(patch, X)
    return 2.0 * proj - np.asarray(X, dtype=float)


def signed_distance(patch, X):
    return chart_coords(patch, X)[..., 1]


def in_complementary_ball(patch, P, r, X):
    """Membership of X in the reflected part of B_r(P) outside the domain."""
    X = np.asarray(X, dtype=float)
    P = np.asarray(P, dtype=float)
    Y = chart_coords(patch, X)
    inside = Y[..., 1] > 0.0
    Yr = Y.copy()
    Yr[..., 1] = -Y[..., 1]
    Xr = tubular_map(patch, Yr)
    in_ball = np.linalg.norm(Xr - P, axis=-1) < r
    return inside & in_ball


def pullback_metric_connection(patch, Y):
    """Pull-back metric h_ij and Levi-Civita coefficients Gamma[k, i, j]."""
    Y = np.asarray(Y, dtype=float)
    if patch.is_flat:
        shape = Y.shape[:-1]
        h = np.broadcast_to(np.eye(3), shape + (3, 3)).copy()
        return h, np.zeros(shape + (3, 3, 3))
    fr = chart_frames(patch, Y, order=2)
    dPhi, d2Phi = fr["dPhi"], fr["d2Phi"]
    h = np.einsum("...ci,...cj->...ij", dPhi, dPhi)
    det = np.linalg.det(h)
    if np.any(det <= 0.0):
        raise SingularMetricError("pull-back metric is degenerate (chart overreach)")
    hinv = np.linalg.inv(h)
    # flat ambient: d2Phi_ij lies in span(dPhi), so Gamma^k_ij = h^{kl} d2Phi_ij . dPhi_l
    Gamma = np.einsum("...kl,...cij,...cl->...kij", hinv, d2Phi, dPhi)
    return h, Gamma


# ---------------------------------------------------------------------------
# kappa-condition verification
# ---------------------------------------------------------------------------

@dataclass
class KappaReport:
    max_hess: float
    max_third: float
    lipschitz_third: float
    min_mean_curvature: float
    metric_deviation_constant: float
    kappa: float
    passed: bool = field(init=False)

    def __post_init__(self):
        k = self.kappa
        tol = 1e-10
        bounds_ok = (
            self.max_hess <= k + tol
            and self.max_third <= k**2 + tol
            and self.lipschitz_third <= k**3 + tol
        )
        self.passed = bounds_ok and self.min_mean_curvature >= -1e-8


def _tangent_lattice(patch, n=65):
    cr = patch.chart_radius
    ax = np.linspace(-cr, cr, n)
    P, Q = np.meshgrid(ax, ax, indexing="ij")
    mask = P**2 + Q**2 < cr**2 * (1.0 - 1e-12)
    return P[mask], Q[mask], ax[1] - ax[0]


def verify_kappa_condition(patch, n=65):
    """Check the derivative bounds of the graph condition on a sample lattice."""
    p, q, dx = _tangent_lattice(patch, n)
    phi, g1, g2, g3 = patch.profile.derivs(p, q)

    hess_norm = np.linalg.norm(g2, ord=2, axis=(-2, -1))
    third_norm = np.max(np.abs(g3).reshape(g3.shape[0], -1), axis=-1)

    # Lipschitz constant of the third derivative, estimated from lattice pairs
    lip = 0.0
    if patch.kind != "flat":
        pts = np.stack([p, q], axis=-1)
        flat3 = g3.reshape(g3.shape[0], -1)
        # compare each sample against a strided subset to bound pair count
        stride = max(1, len(p) // 800)
        sub = slice(None, None, stride)
        dp = np.linalg.norm(pts[:, None, :] - pts[None, sub, :], axis=-1)
        dv = np.max(np.abs(flat3[:, None, :] - flat3[None, sub, :]), axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            ratios = np.where(dp > 0, dv / dp, 0.0)
        lip = float(np.max(ratios))

    # mean curvature of the graph with respect to the inward (upward) normal
    W2 = 1.0 + np.sum(g1**2, axis=-1)
    H = (
        (1.0 + g1[..., 1] ** 2) * g2[..., 0, 0]
        - 2.0 * g1[..., 0] * g1[..., 1] * g2[..., 0, 1]
        + (1.0 + g1[..., 0] ** 2) * g2[..., 1, 1]
    ) / W2**1.5

    # measured constant in |h_ij - delta_ij| <= C * kappa * |Y|
    dev_const = 0.0
    if patch.kappa > 0:
        rng = np.random.default_rng(0)
        m = 200
        R = 0.8 * patch.chart_radius
        Y = rng.uniform(-R / 2, R / 2, size=(m, 3))
        h, _ = pullback_metric_connection(patch, Y)
        dev = np.max(np.abs(h - np.eye(3)), axis=(-2, -1))
        norms = np.linalg.norm(Y, axis=-1)
        dev_const = float(np.max(dev / (patch.kappa * norms)))

    return KappaReport(
        max_hess=float(np.max(hess_norm)),
        max_third=float(np.max(third_norm)),
        lipschitz_third=lip,
        min_mean_curvature=float(np.min(H)),
        metric_deviation_constant=dev_const,
        kappa=patch.kappa,
    )
