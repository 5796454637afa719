"""Discrete geometry of height-field surfaces composed with the support chart.

A GraphSurface stores height samples u(y1, y2) on a uniform rectangle of
chart coordinates; the surface is X = Phi(y1, y2, u).  The measurement
footprint is the half-disk (or disk) of radius r_dom, realized through exact
circle-box cell overlap weights so integrals converge at second order.
The free boundary sits on the edge y2 = 0 where the homogeneous Neumann
condition holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .analytic import AnalyticSurface, FieldSample
from .errors import FbmcfError, SingularMetricError
from .support import (
    SupportPatch,
    chart_coords,
    chart_frames,
    in_complementary_ball,
    tubular_map,
)


# ---------------------------------------------------------------------------
# Exact circle-box overlap quadrature
# ---------------------------------------------------------------------------

def _corner_area(x, y, R):
    """Area of {t^2 + s^2 < R^2} within [0,x] x [0,y] for x, y >= 0."""
    x = np.minimum(x, R)
    y = np.minimum(y, R)

    def G(t):
        t = np.clip(t, -R, R)
        return 0.5 * (t * np.sqrt(np.maximum(R * R - t * t, 0.0))
                      + R * R * np.arcsin(t / R))

    c = np.sqrt(np.maximum(R * R - y * y, 0.0))
    xc = np.minimum(x, c)
    return xc * y + np.where(x > c, G(x) - G(c), 0.0)


def _signed_corner(x, y, R):
    return np.sign(x) * np.sign(y) * _corner_area(np.abs(x), np.abs(y), R)


def circle_box_area(R, x0, x1, y0, y1):
    """Exact area of the centered disk of radius R inside [x0,x1] x [y0,y1]."""
    return (_signed_corner(x1, y1, R) - _signed_corner(x0, y1, R)
            - _signed_corner(x1, y0, R) + _signed_corner(x0, y0, R))


def disk_cell_weights(y1, y2, h, R, half):
    """Per-node overlap areas of the dual cells with the footprint disk."""
    X0, Y0 = np.meshgrid(y1 - 0.5 * h, y2 - 0.5 * h, indexing="ij")
    X1, Y1 = np.meshgrid(y1 + 0.5 * h, y2 + 0.5 * h, indexing="ij")
    if half:
        Y0 = np.maximum(Y0, 0.0)  # clip at the free-boundary edge
    return circle_box_area(R, X0, X1, Y0, Y1)


# ---------------------------------------------------------------------------
# Finite differences (second order, ghost-row even reflection at y2 = 0)
# ---------------------------------------------------------------------------

def _grad_hess(U, h, half):
    n1, n2 = U.shape
    d1 = np.empty_like(U)
    d1[1:-1] = (U[2:] - U[:-2]) / (2 * h)
    d1[0] = (-3 * U[0] + 4 * U[1] - U[2]) / (2 * h)
    d1[-1] = (3 * U[-1] - 4 * U[-2] + U[-3]) / (2 * h)

    d11 = np.empty_like(U)
    d11[1:-1] = (U[2:] - 2 * U[1:-1] + U[:-2]) / h**2
    d11[0] = (2 * U[0] - 5 * U[1] + 4 * U[2] - U[3]) / h**2
    d11[-1] = (2 * U[-1] - 5 * U[-2] + 4 * U[-3] - U[-4]) / h**2

    d2 = np.empty_like(U)
    d22 = np.empty_like(U)
    d2[:, 1:-1] = (U[:, 2:] - U[:, :-2]) / (2 * h)
    d22[:, 1:-1] = (U[:, 2:] - 2 * U[:, 1:-1] + U[:, :-2]) / h**2
    if half:
        # ghost value u(y1, -h) = u(y1, h): Neumann exact at stencil level
        d2[:, 0] = 0.0
        d22[:, 0] = 2.0 * (U[:, 1] - U[:, 0]) / h**2
    else:
        d2[:, 0] = (-3 * U[:, 0] + 4 * U[:, 1] - U[:, 2]) / (2 * h)
        d22[:, 0] = (2 * U[:, 0] - 5 * U[:, 1] + 4 * U[:, 2] - U[:, 3]) / h**2
    d2[:, -1] = (3 * U[:, -1] - 4 * U[:, -2] + U[:, -3]) / (2 * h)
    d22[:, -1] = (2 * U[:, -1] - 5 * U[:, -2] + 4 * U[:, -3] - U[:, -4]) / h**2

    d12 = np.empty_like(U)
    d12[:, 1:-1] = (d1[:, 2:] - d1[:, :-2]) / (2 * h)
    if half:
        d12[:, 0] = 0.0  # d1 is even across the edge
    else:
        d12[:, 0] = (-3 * d1[:, 0] + 4 * d1[:, 1] - d1[:, 2]) / (2 * h)
    d12[:, -1] = (3 * d1[:, -1] - 4 * d1[:, -2] + d1[:, -3]) / (2 * h)

    du = np.stack([d1, d2], axis=-1)
    d2u = np.empty(U.shape + (2, 2))
    d2u[..., 0, 0] = d11
    d2u[..., 0, 1] = d2u[..., 1, 0] = d12
    d2u[..., 1, 1] = d22
    return du, d2u


# ---------------------------------------------------------------------------
# GraphSurface
# ---------------------------------------------------------------------------

@dataclass
class GraphSurface:
    """Height field over a (half-)disk in chart coordinates at one time."""

    patch: SupportPatch
    h: float
    r_dom: float
    u: np.ndarray
    t: float = 0.0
    half: bool = True
    topology: str = None
    _geom: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        m = self.m
        if abs(m * self.h - self.r_dom) > 1e-9 * self.r_dom:
            raise ValueError("grid spacing must divide the footprint radius")
        n2 = m + 1 if self.half else 2 * m + 1
        if self.u.shape != (2 * m + 1, n2):
            raise ValueError(f"height array shape {self.u.shape} does not match grid")
        if not np.all(np.isfinite(self.u)):
            raise ValueError("non-finite height samples")

    @property
    def m(self):
        return int(round(self.r_dom / self.h))

    @property
    def y1(self):
        return self.h * np.arange(-self.m, self.m + 1)

    @property
    def y2(self):
        lo = 0 if self.half else -self.m
        return self.h * np.arange(lo, self.m + 1)

    @property
    def j_edge(self):
        """Row index of the free-boundary edge y2 = 0 (half domains only)."""
        return 0

    def neumann_residual(self):
        """One-sided discrete normal derivative along the free-boundary edge."""
        if not self.half:
            return 0.0
        U = self.u
        one_sided = (-3 * U[:, 0] + 4 * U[:, 1] - U[:, 2]) / (2 * self.h)
        return float(np.max(np.abs(one_sided)))

    def with_height(self, u, t=None):
        return GraphSurface(self.patch, self.h, self.r_dom, u,
                            self.t if t is None else t, self.half, self.topology)

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, patch, h, r_dom, half=True):
        m = int(round(r_dom / h))
        n2 = m + 1 if half else 2 * m + 1
        return cls(patch, h, r_dom, np.zeros((2 * m + 1, n2)), 0.0, half)

    @classmethod
    def from_height(cls, fn, patch, h, r_dom, t=0.0, half=True):
        m = int(round(r_dom / h))
        lo = 0 if half else -m
        Y1, Y2 = np.meshgrid(h * np.arange(-m, m + 1), h * np.arange(lo, m + 1),
                             indexing="ij")
        return cls(patch, h, r_dom, np.asarray(fn(Y1, Y2), dtype=float), t, half)

    @classmethod
    def sphere_cap(cls, R0, h, r_dom, t=0.0, patch=None, half=True):
        """Graph piece of the shrinking sphere of initial radius R0."""
        from .flow import shrinking_radius

        R = shrinking_radius(R0, t)
        patch = SupportPatch.flat() if patch is None else patch
        return cls.from_height(
            lambda a, b: np.sqrt(R**2 - a**2 - b**2), patch, h, r_dom, t, half
        )

    # -- geometry -----------------------------------------------------------

    def geometry(self):
        if self._geom is None:
            self._geom = fundamental_forms(self)
        return self._geom

    def samples(self):
        """Footprint nodes as a FieldSample (positions, dA weights, N, H, |A|^2)."""
        g = self.geometry()
        mask = g.mask
        return FieldSample(g.X[mask], g.dA[mask], g.N[mask], g.H[mask], g.A2[mask])


@dataclass
class SurfaceGeometry:
    """Per-node geometric data of a GraphSurface."""

    X: np.ndarray       # (n1, n2, 3) ambient positions
    N: np.ndarray       # (n1, n2, 3) inward unit normal
    du: np.ndarray      # (n1, n2, 2)
    d2u: np.ndarray     # (n1, n2, 2, 2)
    g: np.ndarray       # (n1, n2, 2, 2) induced metric
    ginv: np.ndarray
    A: np.ndarray       # (n1, n2, 2, 2) second fundamental form
    H: np.ndarray
    A2: np.ndarray      # |A|^2
    sqrtg: np.ndarray
    wcell: np.ndarray   # footprint cell overlap areas
    dA: np.ndarray      # sqrt(det g) * wcell
    coeff_f: np.ndarray  # lower-order PDE coefficient g^{ij}(Gamma^3_ij + Q_ij)
    mask: np.ndarray    # wcell > 0


def _inv2x2(g):
    det = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
    if np.any(det <= 0.0):
        raise SingularMetricError("induced metric is degenerate")
    inv = np.empty_like(g)
    inv[..., 0, 0] = g[..., 1, 1]
    inv[..., 1, 1] = g[..., 0, 0]
    inv[..., 0, 1] = inv[..., 1, 0] = -g[..., 0, 1]
    return inv / det[..., None, None], det


def fundamental_forms(surface):
    """Induced metric, second fundamental form, curvature, and quadrature data."""
    U, h = surface.u, surface.h
    du, d2u = _grad_hess(U, h, surface.half)
    Y1, Y2 = np.meshgrid(surface.y1, surface.y2, indexing="ij")

    if surface.patch.is_flat:
        X = np.stack([Y1, Y2, U], axis=-1)
        g = np.empty(U.shape + (2, 2))
        for i in range(2):
            for j in range(2):
                g[..., i, j] = (1.0 if i == j else 0.0) + du[..., i] * du[..., j]
        S = d2u  # Gamma = 0, Q = 0
        Tan = np.zeros(U.shape + (3, 2))
        Tan[..., 0, 0] = 1.0
        Tan[..., 1, 1] = 1.0
        Tan[..., 2, :] = du
        phi3 = np.zeros(U.shape + (3,))
        phi3[..., 2] = 1.0
        low = np.zeros(U.shape + (2, 2))
    else:
        Y = np.stack([Y1, Y2, U], axis=-1)
        fr = chart_frames(surface.patch, Y, order=2)
        X, dPhi, d2Phi = fr["X"], fr["dPhi"], fr["d2Phi"]
        hm = np.einsum("...ci,...cj->...ij", dPhi, dPhi)
        hinv = np.linalg.inv(hm)
        Gam = np.einsum("...kl,...cij,...cl->...kij", hinv, d2Phi, dPhi)

        g = np.empty(U.shape + (2, 2))
        for i in range(2):
            for j in range(2):
                g[..., i, j] = (hm[..., i, j]
                                + hm[..., i, 2] * du[..., j]
                                + hm[..., j, 2] * du[..., i]
                                + hm[..., 2, 2] * du[..., i] * du[..., j])
        Q = np.empty(U.shape + (2, 2))
        for i in range(2):
            for j in range(2):
                q = (Gam[..., 2, i, 2] * du[..., j]
                     + Gam[..., 2, j, 2] * du[..., i]
                     + Gam[..., 2, 2, 2] * du[..., i] * du[..., j])
                for k in range(2):
                    q = q - (Gam[..., k, i, j] * du[..., k]
                             + Gam[..., k, i, 2] * du[..., j] * du[..., k]
                             + Gam[..., k, j, 2] * du[..., i] * du[..., k]
                             + Gam[..., k, 2, 2] * du[..., i] * du[..., j] * du[..., k])
                Q[..., i, j] = q
        low = Gam[..., 2, :2, :2] + Q
        S = low + d2u
        Tan = dPhi[..., :, :2] + dPhi[..., :, 2:3] * du[..., None, :]
        phi3 = dPhi[..., :, 2]

    cross = np.cross(Tan[..., :, 0], Tan[..., :, 1])
    N = -cross / np.linalg.norm(cross, axis=-1, keepdims=True)
    phi3N = np.einsum("...c,...c->...", phi3, N)
    A = phi3N[..., None, None] * S

    ginv, det = _inv2x2(g)
    Hcur = np.einsum("...ij,...ij->...", ginv, A)
    GA = np.einsum("...ik,...kj->...ij", ginv, A)
    A2 = np.einsum("...ij,...ji->...", GA, GA)
    coeff_f = np.einsum("...ij,...ij->...", ginv, low) if not surface.patch.is_flat \
        else np.zeros_like(U)

    wcell = disk_cell_weights(surface.y1, surface.y2, h, surface.r_dom, surface.half)
    sqrtg = np.sqrt(det)
    return SurfaceGeometry(X, N, du, d2u, g, ginv, A, Hcur, A2, sqrtg, wcell,
                           sqrtg * wcell, coeff_f, wcell > 0)


# ---------------------------------------------------------------------------
# Integrals and boundary length
# ---------------------------------------------------------------------------

def integrate(surface, field, radius=None):
    """Sum field * sqrt(det g) * cell-overlap over the footprint.

    radius restricts the footprint to a smaller concentric disk (used for
    material-cap area tracking).
    """
    g = surface.geometry()
    if radius is None:
        w = g.dA
    else:
        w = g.sqrtg * disk_cell_weights(surface.y1, surface.y2, surface.h,
                                        radius, surface.half)
    return float(np.sum(np.asarray(field) * w))


def perimeter(surface):
    """Length of the free-boundary curve."""
    if isinstance(surface, AnalyticSurface):
        return surface.perimeter()
    if not surface.half:
        raise ValueError("surface has no free-boundary edge")
    Xe = surface.geometry().X[:, surface.j_edge, :]
    return float(np.sum(np.linalg.norm(np.diff(Xe, axis=0), axis=-1)))


# ---------------------------------------------------------------------------
# Area ratios
# ---------------------------------------------------------------------------

@dataclass
class AreaRatio:
    ratio: float
    area_component: float
    area_reflected: float
    partial: bool


def modified_area_ratio(surface, P, r, include_reflection=None):
    """Boundary-compensated area ratio over the ball B_r(P).

    Sums the connected grid component through the node nearest P, plus the
    part of that component lying in the reflected complementary ball, over
    pi r^2.  The reflection term is skipped in closed (full-disk) mode.
    """
    if include_reflection is None:
        include_reflection = surface.half
    P = np.asarray(P, dtype=float)
    g = surface.geometry()
    dist = np.linalg.norm(g.X - P, axis=-1)
    in_ball = (dist < r) & g.mask
    area1 = area2 = 0.0
    if np.any(in_ball):
        masked = np.where(g.mask, dist, np.inf)
        seed = np.unravel_index(np.argmin(masked), dist.shape)
        labels, _ = ndimage.label(in_ball)
        if labels[seed] != 0:
            comp = labels == labels[seed]
            area1 = float(np.sum(g.dA[comp]))
            if include_reflection:
                refl = in_complementary_ball(surface.patch, P, r, g.X[comp])
                area2 = float(np.sum(g.dA[comp][refl]))

    Yp = chart_coords(surface.patch, P)
    partial = bool(np.hypot(Yp[0], Yp[1]) + r > surface.r_dom + 0.5 * surface.h)
    return AreaRatio((area1 + area2) / (np.pi * r**2), area1, area2, partial)


def area_ratio_profile(surface, P, r_list, C=0.0, Lambda=0.0, kappa=0.0,
                       include_reflection=None):
    """Weighted ratio series e^{C(Lambda+kappa)r} * ratio with violation."""
    vals = []
    for r in r_list:
        ar = modified_area_ratio(surface, P, r, include_reflection)
        vals.append(np.exp(C * (Lambda + kappa) * r) * ar.ratio)
    vals = np.array(vals)
    violation = float(np.max(np.maximum(vals[:-1] - vals[1:], 0.0), initial=0.0))
    return vals, violation


# ---------------------------------------------------------------------------
# Gauss-Bonnet energy identity
# ---------------------------------------------------------------------------

def _boundary_second_form_integral(surface, patch):
    """Line integral of the support shape operator along the boundary curve."""
    if patch is None or patch.is_flat:
        return 0.0
    m = 512
    X, T, ds = surface.boundary_samples(m)
    eps = 1e-5 * surface.radius
    from .support import project_and_distance

    _, _, nup = project_and_distance(patch, X + eps * T)
    _, _, num = project_and_distance(patch, X - eps * T)
    att = -np.einsum("mc,mc->m", (nup - num) / (2 * eps), T)
    return float(np.sum(att * ds))


def gauss_bonnet_identity(surface, patch=None):
    """Both sides of energy = ∫H^2 + 2∮A_Gamma(T,T) - 4 pi chi."""
    if isinstance(surface, AnalyticSurface):
        if not surface.is_compact:
            raise FbmcfError("topology-untagged: surface is not compact")
        lhs = surface.integral(lambda s: s.A2)
        ih2 = surface.integral(lambda s: s.H**2)
        chi = 2 if surface.topology == "sphere" else 1
        bterm = (_boundary_second_form_integral(surface, patch)
                 if surface.topology == "disk" else 0.0)
    else:
        if surface.topology is None:
            raise FbmcfError("topology-untagged")
        g = surface.geometry()
        lhs = integrate(surface, g.A2)
        ih2 = integrate(surface, g.H**2)
        chi = 2 if surface.topology == "sphere" else 1
        bterm = 0.0  # grid mode supports rims on flat patches only
    rhs = ih2 + 2.0 * bterm - 4.0 * np.pi * chi
    return {"lhs": lhs, "rhs": rhs, "residual": lhs - rhs}
