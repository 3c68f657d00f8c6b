"""Nodal discontinuous Galerkin spectral element semidiscretizations.

Uniform (optionally jittered) periodic Cartesian grids in 1D/2D with
Legendre-Gauss-Lobatto collocation, full upwind interface fluxes for linear
advection, and local Lax-Friedrichs fluxes for the compressible Euler
equations.  States keep their tensor shape: (nel, n) or (nel, n, nvar) in
1D and (nex, ney, n, n[, nvar]) in 2D with n = p + 1 nodes per direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

GAMMA = 1.4


class AdmissibilityError(ValueError):
    pass


# ---------------------------------------------------------------------------
# LGL operator

@dataclass(frozen=True)
class LglOperator:
    p: int
    nodes: np.ndarray
    weights: np.ndarray
    D: np.ndarray

    @property
    def n(self):
        return self.p + 1


def _legendre_and_deriv(x, p):
    """P_p(x) and P_{p-1}(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, p + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    return p1, p0  # P_p, P_{p-1}


def lgl_nodes_weights(p):
    """LGL nodes and weights on [-1, 1] by Newton iteration to 1e-14."""
    if p < 1:
        raise ValueError("polynomial degree must be at least 1")
    n = p + 1
    x = -np.cos(np.pi * np.arange(n) / p)
    for _ in range(100):
        Pp, Pm = _legendre_and_deriv(x, p)
        # interior nodes are roots of P'_p; Newton on q = (1-x^2) P'_p
        # expressed through the recurrence identity
        dx = (x * Pp - Pm) / (n * Pp)
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    x[0], x[-1] = -1.0, 1.0
    Pp, _ = _legendre_and_deriv(x, p)
    w = 2.0 / (p * n * Pp ** 2)
    return x, w


def differentiation_matrix(nodes):
    """Collocation derivative matrix with the negative-sum diagonal trick."""
    n = len(nodes)
    bary = np.ones(n)
    for i in range(n):
        for j in range(n):
            if i != j:
                bary[i] /= nodes[i] - nodes[j]
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = bary[j] / (bary[i] * (nodes[i] - nodes[j]))
        D[i, i] = -np.sum(D[i])
    return D


@lru_cache(maxsize=None)
def lgl_operator(p) -> LglOperator:
    x, w = lgl_nodes_weights(p)
    return LglOperator(p=p, nodes=x, weights=w, D=differentiation_matrix(x))


# ---------------------------------------------------------------------------
# grids

@dataclass(frozen=True)
class Grid1d:
    """Periodic 1D mesh given by element boundary coordinates."""

    boundaries: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.boundaries, dtype=float)
        if len(b) < 2 or np.any(np.diff(b) <= 0):
            raise ValueError("boundaries must be strictly increasing")
        object.__setattr__(self, "boundaries", b)

    @classmethod
    def uniform(cls, lo, hi, nel):
        return cls(np.linspace(lo, hi, nel + 1))

    @classmethod
    def perturbed(cls, lo, hi, nel, amplitude=0.2, seed=0):
        """Uniform grid with interior boundaries jittered by +-amplitude*h."""
        rng = np.random.default_rng(seed)
        b = np.linspace(lo, hi, nel + 1)
        h = (hi - lo) / nel
        b[1:-1] += amplitude * h * rng.uniform(-1.0, 1.0, nel - 1)
        return cls(b)

    @property
    def nel(self):
        return len(self.boundaries) - 1

    @property
    def widths(self):
        return np.diff(self.boundaries)

    def nodes(self, op: LglOperator):
        """Physical node coordinates, shape (nel, n)."""
        left = self.boundaries[:-1, None]
        return left + 0.5 * (op.nodes[None, :] + 1.0) * self.widths[:, None]


@dataclass(frozen=True)
class Grid2d:
    x: Grid1d
    y: Grid1d

    @classmethod
    def uniform(cls, lo, hi, nel):
        return cls(Grid1d.uniform(lo, hi, nel), Grid1d.uniform(lo, hi, nel))

    @classmethod
    def perturbed(cls, lo, hi, nel, amplitude=0.2, seed=0):
        return cls(Grid1d.perturbed(lo, hi, nel, amplitude, seed),
                   Grid1d.perturbed(lo, hi, nel, amplitude, seed + 1))

    def nodes(self, op: LglOperator):
        """Meshgrid node coordinates X, Y of shape (nex, ney, n, n)."""
        xn = self.x.nodes(op)   # (nex, n)
        yn = self.y.nodes(op)   # (ney, n)
        X = xn[:, None, :, None] * np.ones((1, self.y.nel, 1, op.n))
        Y = yn[None, :, None, :] * np.ones((self.x.nel, 1, op.n, 1))
        return X, Y


# ---------------------------------------------------------------------------
# linear advection

class AdvectionSemidisc1d:
    """u_t + a u_x = 0, periodic, full upwind interface flux."""

    def __init__(self, grid: Grid1d, p: int, velocity: float):
        self.grid = grid
        self.op = lgl_operator(p)
        self.a = float(velocity)
        self.jacobian = 0.5 * grid.widths          # dx/dxi per element
        self.x = grid.nodes(self.op)

    @property
    def n_dof(self):
        return self.grid.nel * self.op.n

    def rhs(self, t, u):
        op, a = self.op, self.a
        with np.errstate(over="ignore", invalid="ignore"):
            du = -(a / self.jacobian[:, None]) * (u @ op.D.T)
            if a > 0:
                ujump = np.roll(u[:, -1], 1) - u[:, 0]
                du[:, 0] += (a / (self.jacobian * op.weights[0])) * ujump
            elif a < 0:
                ujump = np.roll(u[:, 0], -1) - u[:, -1]
                du[:, -1] += (-a / (self.jacobian * op.weights[-1])) * ujump
        return du

    __call__ = rhs

    def is_admissible(self, u):
        return bool(np.all(np.isfinite(u)))

    def cfl_timescale(self, u):
        if self.a == 0.0:
            return math.inf
        return float(np.min(self.grid.widths)) / abs(self.a)

    def integral(self, u):
        wvol = self.jacobian[:, None] * self.op.weights[None, :]
        return float(np.sum(u * wvol))

    def l2_error(self, u, ref):
        with np.errstate(over="ignore", invalid="ignore"):
            d = (u - ref) ** 2
            return float(np.sqrt(np.einsum("en,e,n->", d, self.jacobian, self.op.weights)))

    def as_matrix(self):
        m = self.n_dof
        shape = (self.grid.nel, self.op.n)
        L = np.zeros((m, m))
        for j in range(m):
            e = np.zeros(m)
            e[j] = 1.0
            L[:, j] = self.rhs(0.0, e.reshape(shape)).ravel()
        return L


class AdvectionSemidisc2d:
    """u_t + a . grad u = 0 on a periodic tensor-product grid."""

    def __init__(self, grid: Grid2d, p: int, velocity):
        self.grid = grid
        self.op = lgl_operator(p)
        self.a = np.asarray(velocity, dtype=float)
        self.jx = 0.5 * grid.x.widths
        self.jy = 0.5 * grid.y.widths
        self.X, self.Y = grid.nodes(self.op)

    @property
    def n_dof(self):
        return self.grid.x.nel * self.grid.y.nel * self.op.n ** 2

    def rhs(self, t, u):
        with np.errstate(over="ignore", invalid="ignore"):
            return self._rhs(t, u)

    def _rhs(self, t, u):
        op = self.op
        ax, ay = self.a
        D = op.D
        w0, wN = op.weights[0], op.weights[-1]
        du = np.zeros_like(u)
        if ax != 0.0:
            du -= (ax / self.jx[:, None, None, None]) * np.einsum("am,efmb->efab", D, u)
            if ax > 0:
                jump = np.roll(u[:, :, -1, :], 1, axis=0) - u[:, :, 0, :]
                du[:, :, 0, :] += (ax / (self.jx[:, None, None] * w0)) * jump
            else:
                jump = np.roll(u[:, :, 0, :], -1, axis=0) - u[:, :, -1, :]
                du[:, :, -1, :] += (-ax / (self.jx[:, None, None] * wN)) * jump
        if ay != 0.0:
            du -= (ay / self.jy[None, :, None, None]) * np.einsum("bm,efam->efab", D, u)
            if ay > 0:
                jump = np.roll(u[:, :, :, -1], 1, axis=1) - u[:, :, :, 0]
                du[:, :, :, 0] += (ay / (self.jy[None, :, None] * w0)) * jump
            else:
                jump = np.roll(u[:, :, :, 0], -1, axis=1) - u[:, :, :, -1]
                du[:, :, :, -1] += (-ay / (self.jy[None, :, None] * wN)) * jump
        return du

    __call__ = rhs

    def is_admissible(self, u):
        return bool(np.all(np.isfinite(u)))

    def cfl_timescale(self, u):
        # min over elements of 1 / sum_j |a_j| / h_j
        sx = abs(self.a[0]) / self.grid.x.widths
        sy = abs(self.a[1]) / self.grid.y.widths
        speed = sx[:, None] + sy[None, :]
        if np.all(speed == 0.0):
            return math.inf
        return float(1.0 / np.max(speed))

    def integral(self, u):
        w = self.op.weights
        wvol = (self.jx[:, None, None, None] * self.jy[None, :, None, None]
                * w[None, None, :, None] * w[None, None, None, :])
        return float(np.sum(u * wvol))

    def l2_error(self, u, ref):
        w = self.op.weights
        with np.errstate(over="ignore", invalid="ignore"):
            d = (u - ref) ** 2
            return float(np.sqrt(np.einsum("efab,e,f,a,b->", d, self.jx, self.jy, w, w)))


# ---------------------------------------------------------------------------
# compressible Euler

def euler_primitives_1d(u):
    rho = u[..., 0]
    v = u[..., 1] / rho
    p = (GAMMA - 1.0) * (u[..., 2] - 0.5 * rho * v * v)
    return rho, v, p


def euler_flux_1d(u):
    rho, v, p = euler_primitives_1d(u)
    f = np.empty_like(u)
    f[..., 0] = u[..., 1]
    f[..., 1] = u[..., 1] * v + p
    f[..., 2] = (u[..., 2] + p) * v
    return f


def euler_primitives_2d(u):
    rho = u[..., 0]
    vx = u[..., 1] / rho
    vy = u[..., 2] / rho
    p = (GAMMA - 1.0) * (u[..., 3] - 0.5 * rho * (vx * vx + vy * vy))
    return rho, vx, vy, p


def euler_flux_2d(u, axis):
    rho, vx, vy, p = euler_primitives_2d(u)
    vn = vx if axis == 0 else vy
    f = np.empty_like(u)
    f[..., 0] = rho * vn
    f[..., 1] = u[..., 1] * vn
    f[..., 2] = u[..., 2] * vn
    if axis == 0:
        f[..., 1] += p
    else:
        f[..., 2] += p
    f[..., 3] = (u[..., 3] + p) * vn
    return f


def _sound_speed(rho, p):
    with np.errstate(invalid="ignore"):
        return np.sqrt(GAMMA * p / rho)


def _llf(fl, fr, ul, ur, lam):
    return 0.5 * (fl + fr) - 0.5 * lam[..., None] * (ur - ul)


class EulerSemidisc1d:
    """1D compressible Euler, nodal DGSEM with local Lax-Friedrichs fluxes.

    An optional spatially-uniform source on the energy equation supports the
    pressure-cycling manufactured flow.
    """

    nvar = 3

    def __init__(self, grid: Grid1d, p: int, energy_source=None):
        self.grid = grid
        self.op = lgl_operator(p)
        self.jacobian = 0.5 * grid.widths
        self.x = grid.nodes(self.op)
        self.energy_source = energy_source

    @property
    def n_dof(self):
        return self.grid.nel * self.op.n * self.nvar

    def is_admissible(self, u):
        if not np.all(np.isfinite(u)):
            return False
        rho, _, p = euler_primitives_1d(u)
        return bool(np.all(rho > 0.0) and np.all(p > 0.0))

    def rhs(self, t, u):
        op = self.op
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            f = euler_flux_1d(u)
            du = -(1.0 / self.jacobian[:, None, None]) * np.einsum("am,emv->eav", op.D, f)
            uR = u[:, 0, :]                       # right state of left interface
            uL = np.roll(u[:, -1, :], 1, axis=0)  # left state of left interface
            rhoL, vL, pL = euler_primitives_1d(uL)
            rhoR, vR, pR = euler_primitives_1d(uR)
            lam = np.maximum(np.abs(vL) + _sound_speed(rhoL, pL),
                             np.abs(vR) + _sound_speed(rhoR, pR))
            fstar = _llf(euler_flux_1d(uL), euler_flux_1d(uR), uL, uR, lam)
            du[:, 0, :] += (fstar - f[:, 0, :]) / (self.jacobian[:, None] * op.weights[0])
            fstar_right = np.roll(fstar, -1, axis=0)
            du[:, -1, :] -= (fstar_right - f[:, -1, :]) / (self.jacobian[:, None] * op.weights[-1])
        if self.energy_source is not None:
            du[..., 2] += self.energy_source(t)
        return du

    __call__ = rhs

    def cfl_timescale(self, u):
        rho, v, p = euler_primitives_1d(u)
        lam = np.abs(v) + _sound_speed(rho, p)
        return float(np.min(self.grid.widths[:, None] / lam))

    def integral(self, u):
        wvol = self.jacobian[:, None] * self.op.weights[None, :]
        return np.sum(u * wvol[..., None], axis=(0, 1))

    def l2_error(self, u, ref):
        w = self.op.weights
        with np.errstate(over="ignore", invalid="ignore"):
            d = (u - ref) ** 2
            return np.sqrt(np.einsum("env,e,n->v", d, self.jacobian, w))


class EulerSemidisc2d:
    """2D compressible Euler on a periodic tensor-product grid."""

    nvar = 4

    def __init__(self, grid: Grid2d, p: int):
        self.grid = grid
        self.op = lgl_operator(p)
        self.jx = 0.5 * grid.x.widths
        self.jy = 0.5 * grid.y.widths
        self.X, self.Y = grid.nodes(self.op)

    @property
    def n_dof(self):
        return self.grid.x.nel * self.grid.y.nel * self.op.n ** 2 * self.nvar

    def is_admissible(self, u):
        if not np.all(np.isfinite(u)):
            return False
        rho, _, _, p = euler_primitives_2d(u)
        return bool(np.all(rho > 0.0) and np.all(p > 0.0))

    def rhs(self, t, u):
        op = self.op
        D = op.D
        w0, wN = op.weights[0], op.weights[-1]
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            fx = euler_flux_2d(u, 0)
            fy = euler_flux_2d(u, 1)
            du = -(1.0 / self.jx[:, None, None, None, None]) * np.einsum("am,efmbv->efabv", D, fx)
            du -= (1.0 / self.jy[None, :, None, None, None]) * np.einsum("bm,efamv->efabv", D, fy)

            # x-direction interfaces
            uR = u[:, :, 0, :, :]
            uL = np.roll(u[:, :, -1, :, :], 1, axis=0)
            lam = self._lam(uL, uR, 0)
            fstar = _llf(euler_flux_2d(uL, 0), euler_flux_2d(uR, 0), uL, uR, lam)
            du[:, :, 0, :, :] += (fstar - fx[:, :, 0, :, :]) / (self.jx[:, None, None, None] * w0)
            fstar_r = np.roll(fstar, -1, axis=0)
            du[:, :, -1, :, :] -= (fstar_r - fx[:, :, -1, :, :]) / (self.jx[:, None, None, None] * wN)

            # y-direction interfaces
            uR = u[:, :, :, 0, :]
            uL = np.roll(u[:, :, :, -1, :], 1, axis=1)
            lam = self._lam(uL, uR, 1)
            fstar = _llf(euler_flux_2d(uL, 1), euler_flux_2d(uR, 1), uL, uR, lam)
            du[:, :, :, 0, :] += (fstar - fy[:, :, :, 0, :]) / (self.jy[None, :, None, None] * w0)
            fstar_r = np.roll(fstar, -1, axis=1)
            du[:, :, :, -1, :] -= (fstar_r - fy[:, :, :, -1, :]) / (self.jy[None, :, None, None] * wN)
        return du

    __call__ = rhs

    def _lam(self, uL, uR, axis):
        rhoL, vxL, vyL, pL = euler_primitives_2d(uL)
        rhoR, vxR, vyR, pR = euler_primitives_2d(uR)
        vnL = vxL if axis == 0 else vyL
        vnR = vxR if axis == 0 else vyR
        return np.maximum(np.abs(vnL) + _sound_speed(rhoL, pL),
                          np.abs(vnR) + _sound_speed(rhoR, pR))

    def cfl_timescale(self, u):
        rho, vx, vy, p = euler_primitives_2d(u)
        c = _sound_speed(rho, p)
        sx = (np.abs(vx) + c) / self.jx[:, None, None, None] / 2.0
        sy = (np.abs(vy) + c) / self.jy[None, :, None, None] / 2.0
        return float(1.0 / np.max(sx + sy))

    def integral(self, u):
        w = self.op.weights
        wvol = (self.jx[:, None, None, None] * self.jy[None, :, None, None]
                * w[None, None, :, None] * w[None, None, None, :])
        return np.sum(u * wvol[..., None], axis=(0, 1, 2, 3))

    def l2_error(self, u, ref):
        w = self.op.weights
        with np.errstate(over="ignore", invalid="ignore"):
            d = (u - ref) ** 2
            return np.sqrt(np.einsum("efabv,e,f,a,b->v", d, self.jx, self.jy, w, w))


# ---------------------------------------------------------------------------
# CFL normalization per polynomial degree

@lru_cache(maxsize=None)
def sigma_for_degree(p, nel=8):
    """Normalizing factor such that a real stability interval of 2 maps to
    nu = 1 on uniform-grid linear advection.

    Measured from the leftmost eigenvalue of the 1D upwind operator: sigma =
    2 / (|min Re lambda| * h / |a|); the constant is element-count
    independent for periodic uniform grids.
    """
    semi = AdvectionSemidisc1d(Grid1d.uniform(0.0, 1.0, nel), p, velocity=1.0)
    ev = np.linalg.eigvals(semi.as_matrix())
    c_p = float(np.max(-ev.real)) * (1.0 / nel)
    return 2.0 / c_p
