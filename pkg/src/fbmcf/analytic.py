"""Closed-form test surfaces with exact geometry.

These carry position, unit normal, mean curvature and |A|^2 in closed form,
and integrate smooth fields by node-doubling quadrature, so functional values
computed on them are independent of any PDE grid.

Orientation convention: the normal of a sphere or hemisphere points toward
the center (inward), giving H = +2/R for a shrinking sphere.  Hemispheres sit
on the flat support plane {x2 = 0} with polar axis (0, 1, 0).
"""

from __future__ import annotations

from collections import namedtuple
from dataclasses import dataclass, replace

import numpy as np

from .errors import FbmcfError

# Point samples of a surface with quadrature weights and exact geometry:
# X (M,3), w (M,), N (M,3), H (M,), A2 (M,)
FieldSample = namedtuple("FieldSample", ["X", "w", "N", "H", "A2"])

_QUAD_TOL = 1e-8
_MAX_NODES = 4096


def _orthobasis(n):
    """Two unit vectors spanning the plane orthogonal to unit vector n."""
    a = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 0.0, 1.0])
    e1 = np.cross(n, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(n, e1)
    return e1, e2


@dataclass(frozen=True)
class AnalyticSurface:
    """A plane, half-plane, sphere, or hemisphere-on-flat-support surface."""

    kind: str                 # plane | half-plane | sphere | hemisphere
    point: np.ndarray         # center (sphere/hemisphere) or base point (planes)
    normal: np.ndarray = None  # unit plane normal (planes only)
    radius: float = None      # sphere/hemisphere radius
    t: float = 0.0

    # -- constructors -------------------------------------------------------

    @classmethod
    def plane(cls, point, normal, t=0.0):
        n = np.asarray(normal, float)
        return cls("plane", np.asarray(point, float), n / np.linalg.norm(n), None, t)

    @classmethod
    def half_plane(cls, point, normal, t=0.0):
        """Half-plane {x2 >= 0} meeting the flat support plane orthogonally."""
        n = np.asarray(normal, float)
        n = n / np.linalg.norm(n)
        if abs(n[1]) > 1e-12:
            raise ValueError("half-plane normal must be orthogonal to (0,1,0)")
        base = np.asarray(point, float).copy()
        base[1] = 0.0
        return cls("half-plane", base, n, None, t)

    @classmethod
    def sphere(cls, center, R, t=0.0):
        return cls("sphere", np.asarray(center, float), None, float(R), t)

    @classmethod
    def hemisphere(cls, center, R, t=0.0):
        center = np.asarray(center, float)
        if abs(center[1]) > 1e-12:
            raise ValueError("hemisphere center must lie on the flat support plane")
        return cls("hemisphere", center, None, float(R), t)

    # -- basic facts --------------------------------------------------------

    @property
    def topology(self):
        return {"plane": "plane", "half-plane": "plane",
                "sphere": "sphere", "hemisphere": "disk"}[self.kind]

    @property
    def is_compact(self):
        return self.kind in ("sphere", "hemisphere")

    def translate_scale(self, P, lam):
        """The surface (S - P)/lam, geometry transformed exactly."""
        P = np.asarray(P, float)
        lam = float(lam)
        if self.is_compact:
            return replace(self, point=(self.point - P) / lam, radius=self.radius / lam)
        return replace(self, point=(self.point - P) / lam)

    # -- sampling -----------------------------------------------------------

    def samples(self, m, focus=None, extent=None):
        """FieldSample with about m^2 nodes; focus/extent steer planar grids."""
        if self.kind in ("sphere", "hemisphere"):
            return self._sphere_samples(m)
        if extent is None:
            raise ValueError("planar surfaces need an integration extent")
        return self._plane_samples(m, focus, float(extent))

    def _sphere_samples(self, m):
        R, c = self.radius, self.point
        th_max = np.pi if self.kind == "sphere" else 0.5 * np.pi
        th, wth = np.polynomial.legendre.leggauss(m)
        th = 0.5 * th_max * (th + 1.0)
        wth = 0.5 * th_max * wth
        ph = 2.0 * np.pi * np.arange(2 * m) / (2 * m)
        wph = np.full(2 * m, np.pi / m)
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        W = np.outer(wth, wph) * R**2 * np.sin(TH)
        # polar axis (0,1,0): theta = 0 at the pole pointing into the domain
        X = c + R * np.stack(
            [np.sin(TH) * np.cos(PH), np.cos(TH), np.sin(TH) * np.sin(PH)], axis=-1
        )
        N = (c - X) / R
        M = X.reshape(-1, 3).shape[0]
        return FieldSample(
            X.reshape(-1, 3), W.ravel(), N.reshape(-1, 3),
            np.full(M, 2.0 / R), np.full(M, 2.0 / R**2),
        )

    def _plane_samples(self, m, focus, extent):
        n = self.normal
        if self.kind == "plane":
            e1, e2 = _orthobasis(n)
            base = self.point
            if focus is not None:
                f = np.asarray(focus, float) - base
                base = base + f - np.dot(f, n) * n
            rho, wr = np.polynomial.legendre.leggauss(m)
            rho = 0.5 * extent * (rho + 1.0)
            wr = 0.5 * extent * wr
            ph = 2.0 * np.pi * np.arange(2 * m) / (2 * m)
            wph = np.full(2 * m, np.pi / m)
            RHO, PH = np.meshgrid(rho, ph, indexing="ij")
            W = np.outer(wr * rho, wph)
            X = base + RHO[..., None] * (
                np.cos(PH)[..., None] * e1 + np.sin(PH)[..., None] * e2
            )
        else:
            # half-plane: edge along n x (0,1,0), upward direction (0,1,0)
            up = np.array([0.0, 1.0, 0.0])
            edge = np.cross(n, up)
            edge /= np.linalg.norm(edge)
            base = self.point
            if focus is not None:
                f = np.asarray(focus, float) - base
                base = base + np.dot(f, edge) * edge
            rho, wr = np.polynomial.legendre.leggauss(m)
            rho = 0.5 * extent * (rho + 1.0)
            wr = 0.5 * extent * wr
            ph, wph = np.polynomial.legendre.leggauss(m)
            ph = 0.5 * np.pi * (ph + 1.0)
            wph = 0.5 * np.pi * wph
            RHO, PH = np.meshgrid(rho, ph, indexing="ij")
            W = np.outer(wr * rho, wph)
            X = base + RHO[..., None] * (
                np.cos(PH)[..., None] * edge + np.sin(PH)[..., None] * up
            )
        M = X.reshape(-1, 3).shape[0]
        return FieldSample(
            X.reshape(-1, 3), W.ravel(),
            np.broadcast_to(n, (M, 3)).copy(), np.zeros(M), np.zeros(M),
        )

    def integral(self, fn, focus=None, extent=None, tol=_QUAD_TOL):
        """Node-doubling quadrature of fn(FieldSample) -> per-node values."""
        m = 48
        prev = None
        while m <= _MAX_NODES:
            s = self.samples(m, focus=focus, extent=extent)
            val = float(np.sum(np.asarray(fn(s)) * s.w))
            if prev is not None and abs(val - prev) <= tol * (abs(val) + 1.0):
                return val
            prev = val
            m *= 2
        raise FbmcfError("analytic quadrature did not converge")

    # -- boundary curve (hemisphere only) ------------------------------------

    def boundary_samples(self, m):
        """Points and unit tangents of the boundary circle on the support plane."""
        if self.kind != "hemisphere":
            raise ValueError("only hemispheres carry a compact boundary curve")
        R, c = self.radius, self.point
        ph = 2.0 * np.pi * np.arange(m) / m
        X = c + R * np.stack([np.cos(ph), np.zeros(m), np.sin(ph)], axis=-1)
        T = np.stack([-np.sin(ph), np.zeros(m), np.cos(ph)], axis=-1)
        ds = np.full(m, 2.0 * np.pi * R / m)
        return X, T, ds

    def perimeter(self, tol=_QUAD_TOL):
        """Boundary length by polyline refinement."""
        if self.kind != "hemisphere":
            raise ValueError("only hemispheres carry a compact boundary curve")
        m = 256
        prev = None
        while m <= 10**7:
            X, _, _ = self.boundary_samples(m)
            val = float(np.sum(np.linalg.norm(np.roll(X, -1, axis=0) - X, axis=-1)))
            if prev is not None and abs(val - prev) <= tol * (abs(val) + 1.0):
                return val
            prev = val
            m *= 4
        raise FbmcfError("perimeter refinement did not converge")
