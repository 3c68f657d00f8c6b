"""Stability polynomials, region boundaries, and step-size-control stability.

The boundary of the absolute stability region is traced as the locus branch
R(z) = e^{i theta} through the origin, continued in theta until the curve
closes (theta winds through several multiples of 2 pi for higher-order
methods whose boundary hugs the imaginary axis).

Step-size-control stability samples the 6x6 Jacobian of the coupled
(log step, log error) recursion at boundary points and requires spectral
radius below one.  Its entries use the real parts of the logarithmic
derivatives z R'(z)/R(z) and z E'(z)/E(z), since the recursion governs the
moduli.  Samples are excluded when they carry no controller information:

* degenerate points, |R(z)| or |E(z)| below 1e-14 (E always vanishes at the
  origin);
* tangential points where |Re(z R'/R)| < 1e-3: there the radial error growth
  vanishes to leading order and the Jacobian has a neutral eigenvalue at 1
  regardless of the controller (these cluster where the boundary runs along
  the imaginary axis);
* points with Re(z) > 0, unreachable as z = dt*lambda for dissipative
  semidiscretizations.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass

import numpy as np

from .butcher import ButcherPair
from .lowstorage import to_butcher

polyval = np.polynomial.polynomial.polyval
polyder = np.polynomial.polynomial.polyder

BOUNDARY_TOL = 1e-10
DEGENERATE_TOL = 1e-14
TANGENTIAL_TOL = 1e-3


class TraceError(RuntimeError):
    def __init__(self, msg, theta):
        super().__init__(f"{msg} (last theta = {theta:.6f})")
        self.theta = theta


class DegeneratePointError(ValueError):
    pass


@dataclass(frozen=True)
class StabilityPolynomials:
    """Main polynomial R, embedded polynomial, and their difference E."""

    main: np.ndarray        # coefficients of R, ascending powers
    embedded: np.ndarray    # embedded stability polynomial (FSAL-extended tableau)
    diff: np.ndarray        # E = embedded - main
    s_eff: int              # effective stage count for region scaling

    def __post_init__(self):
        for attr in ("main", "embedded", "diff"):
            object.__setattr__(self, attr, np.asarray(getattr(self, attr), dtype=float))

    def R(self, z):
        return polyval(z, self.main)

    def Rprime(self, z):
        return polyval(z, polyder(self.main))

    def E(self, z):
        return polyval(z, self.diff)

    def Eprime(self, z):
        return polyval(z, polyder(self.diff))


@dataclass(frozen=True)
class BoundaryTrace:
    points: np.ndarray
    thetas: np.ndarray
    total_theta: float


@dataclass(frozen=True)
class ControlStabilityReport:
    samples: list                 # (z, rho) at retained boundary samples
    max_rho: float
    stable: bool
    n_skipped: int
    margin: float = 0.0


def _weight_polynomial(A, w):
    """Coefficients of 1 + sum_j (w A^{j-1} 1) z^j."""
    s = A.shape[0]
    coeffs = [1.0]
    v = np.ones(s)
    for _ in range(s):
        coeffs.append(float(w @ v))
        v = A @ v
    return np.array(coeffs)


def _trim(c):
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if len(nz) else c[:1]


def stability_polynomials(scheme) -> StabilityPolynomials:
    """R, embedded, and E = embedded - main for a pair or low-storage scheme.

    The embedded polynomial of an FSAL pair is computed on the extended
    tableau whose extra row is b, so it has degree up to s+1.
    """
    pair = scheme if isinstance(scheme, ButcherPair) else to_butcher(scheme)
    R = _weight_polynomial(pair.A, pair.b)
    if pair.fsal:
        Ae, _ = pair.extended()
        Re = _weight_polynomial(Ae, pair.bhat)
    else:
        Re = _weight_polynomial(pair.A, pair.bhat[:pair.s])
    n = max(len(R), len(Re))
    E = np.zeros(n)
    E[:len(Re)] += Re
    E[:len(R)] -= R
    return StabilityPolynomials(main=_trim(R), embedded=_trim(Re), diff=E,
                                s_eff=pair.s)


def trace_boundary(polys: StabilityPolynomials, n_points=512, dtheta=2*np.pi/4096,
                   max_winding=64) -> BoundaryTrace:
    """Trace the boundary-locus branch of |R| = 1 through the origin.

    Continuation in theta with a damped Newton corrector; the step in theta
    is halved whenever Newton stalls or the curve moves too far.  The trace
    runs until the branch returns to the origin and is then resampled at
    n_points parameter values.
    """
    if n_points < 64:
        raise ValueError("n_points must be at least 64")
    R, Rp = polys.main, polyder(polys.main)
    zs = [0.0 + 0.0j]
    ths = [0.0]
    z, th = 0.0 + 0.0j, 0.0
    step = dtheta
    while th < 2 * np.pi * max_winding:
        th_new = th + step
        target = np.exp(1j * th_new)
        z0 = z + (target - np.exp(1j * th)) / polyval(z, Rp)
        converged = False
        for _ in range(60):
            resid = polyval(z0, R) - target
            if abs(resid) < 1e-12:
                converged = True
                break
            delta = resid / polyval(z0, Rp)
            lam = 1.0
            while (abs(polyval(z0 - lam * delta, R) - target) >= abs(resid)
                   and lam > 1e-8):
                lam *= 0.5
            z0 = z0 - lam * delta
        dz = abs(z0 - z)
        if not converged or dz > 0.2:
            step *= 0.5
            if step < 1e-10:
                raise TraceError("Newton continuation stalled", th)
            continue
        z, th = z0, th_new
        zs.append(z)
        ths.append(th)
        if dz < 0.05:
            step = min(step * 1.5, dtheta)
        if th > np.pi and abs(z) < 1e-6:
            break
    else:
        raise TraceError("boundary trace did not close", th)
    zs = np.asarray(zs)
    ths = np.asarray(ths)
    total = ths[-1]
    t_out = total * (np.arange(n_points) + 0.5) / n_points
    idx = np.clip(np.searchsorted(ths, t_out), 0, len(zs) - 1)
    pts = zs[idx]
    resid = np.abs(np.abs(polyval(pts, R)) - 1.0)
    if np.max(resid) > BOUNDARY_TOL:
        raise TraceError("traced points violate |R| = 1", float(t_out[np.argmax(resid)]))
    return BoundaryTrace(points=pts, thetas=t_out, total_theta=total)


def grid_boundary(polys: StabilityPolynomials, n_points=512, r_max=None):
    """Fallback boundary sampling by radial bisection of |R| = 1 from the origin.

    Works for star-shaped regions; used when Newton continuation fails.
    """
    R = polys.main
    if r_max is None:
        r_max = 4.0 * polys.s_eff
    out = []
    for phi in np.linspace(0.5 * np.pi, 1.5 * np.pi, n_points):
        d = np.exp(1j * phi)
        lo, hi = 0.0, r_max
        if abs(polyval(hi * d, R)) <= 1.0:
            continue
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if abs(polyval(mid * d, R)) <= 1.0:
                lo = mid
            else:
                hi = mid
        out.append(lo * d)
    return np.asarray(out)


def contains_region(outer: StabilityPolynomials, inner: StabilityPolynomials,
                    n_grid=400, pad=0.5):
    """True iff every grid z inside the inner (main) region satisfies
    |R_outer(z)| <= 1 + 1e-12; the grid covers the inner region's bounding box."""
    trace = trace_boundary(inner, n_points=512)
    pts = trace.points
    re = np.linspace(pts.real.min() - pad, pts.real.max() + pad, n_grid)
    im = np.linspace(pts.imag.min() - pad, pts.imag.max() + pad, n_grid)
    Z = re[None, :] + 1j * im[:, None]
    inside = np.abs(polyval(Z, inner.main)) <= 1.0
    ok = np.abs(polyval(Z, outer.embedded)) <= 1.0 + 1e-12
    bad = inside & ~ok
    violations = Z[bad]
    return not violations.size, violations


def control_jacobian(polys: StabilityPolynomials, z, beta, k) -> np.ndarray:
    """6x6 Jacobian of the boundary fixed-point recursion for a PID controller.

    Entries use Re(z R'/R) and Re(z E'/E); raises DegeneratePointError when
    R or E vanishes at z.
    """
    Rz = polys.R(z)
    Ez = polys.E(z)
    if abs(Rz) < DEGENERATE_TOL or abs(Ez) < DEGENERATE_TOL:
        raise DegeneratePointError(f"R or E degenerate at z = {z}")
    r = (z * polys.Rprime(z) / Rz).real
    e = (z * polys.Eprime(z) / Ez).real
    b1, b2, b3 = beta
    J = np.zeros((6, 6))
    J[0, 0] = 1.0
    J[0, 1] = r
    J[1] = [-b1 / k, 1.0 - (b1 / k) * e, -b2 / k, -(b2 / k) * e, -b3 / k, -(b3 / k) * e]
    J[2, 0] = 1.0
    J[3, 1] = 1.0
    J[4, 2] = 1.0
    J[5, 3] = 1.0
    return J


_SAMPLE_CACHE = {}


def boundary_samples(scheme, n_points=512):
    """Boundary points with cached logarithmic-derivative data for scanning.

    Returns (z, r, e, keep) arrays; keep marks retained (informative) samples
    per the module's exclusion rules.
    """
    key = (id(scheme), n_points)
    hit = _SAMPLE_CACHE.get(key)
    if hit is not None and hit[0]() is not None:
        return hit[1]
    polys = scheme if isinstance(scheme, StabilityPolynomials) else stability_polynomials(scheme)
    trace = trace_boundary(polys, n_points=n_points)
    z = trace.points
    Rz = polyval(z, polys.main)
    Ez = polyval(z, polys.diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(np.abs(Rz) > 0, (z * polyval(z, polyder(polys.main)) / Rz).real, 0.0)
        e = np.where(np.abs(Ez) > 0, (z * polyval(z, polyder(polys.diff)) / Ez).real, 0.0)
    keep = ((np.abs(Rz) >= DEGENERATE_TOL)
            & (np.abs(Ez) >= DEGENERATE_TOL)
            & (np.abs(r) >= TANGENTIAL_TOL)
            & (z.real <= 0.0))
    data = (z, r, e, keep)
    try:
        ref = weakref.ref(scheme)
    except TypeError:
        ref = lambda: scheme
    _SAMPLE_CACHE[key] = (ref, data)
    return data


def _rho_batch(r, e, beta, k):
    """Spectral radii of the control Jacobians for arrays of (r, e) samples."""
    n = len(r)
    b1, b2, b3 = beta
    J = np.zeros((n, 6, 6))
    J[:, 0, 0] = 1.0
    J[:, 0, 1] = r
    J[:, 1, 0] = -b1 / k
    J[:, 1, 1] = 1.0 - (b1 / k) * e
    J[:, 1, 2] = -b2 / k
    J[:, 1, 3] = -(b2 / k) * e
    J[:, 1, 4] = -b3 / k
    J[:, 1, 5] = -(b3 / k) * e
    J[:, 2, 0] = 1.0
    J[:, 3, 1] = 1.0
    J[:, 4, 2] = 1.0
    J[:, 5, 3] = 1.0
    return np.max(np.abs(np.linalg.eigvals(J)), axis=1)


def control_stability_scan(scheme, beta, k=None, n_points=512,
                           margin=0.0) -> ControlStabilityReport:
    """Spectral radius of the control Jacobian along the stability boundary.

    stable is True iff rho < 1 - margin at every retained sample (and at
    least one sample was retained).
    """
    if k is None:
        k = min(scheme.q, scheme.qhat) + 1
    z, r, e, keep = boundary_samples(scheme, n_points=n_points)
    rk, ek, zk = r[keep], e[keep], z[keep]
    n_skipped = int(len(z) - keep.sum())
    if len(rk) == 0:
        return ControlStabilityReport(samples=[], max_rho=np.inf, stable=False,
                                      n_skipped=n_skipped, margin=margin)
    rho = _rho_batch(rk, ek, beta, k)
    return ControlStabilityReport(
        samples=list(zip(zk, rho)),
        max_rho=float(rho.max()),
        stable=bool(np.all(rho < 1.0 - margin)),
        n_skipped=n_skipped,
        margin=margin,
    )


def control_stability_map(scheme, beta, k=None, n_grid=101, pad=0.5):
    """Dense map of the control-Jacobian spectral radius over the region box.

    Returns (Z, rho) with rho = nan at degenerate points; complements the
    boundary scan for plotting.
    """
    if k is None:
        k = min(scheme.q, scheme.qhat) + 1
    polys = scheme if isinstance(scheme, StabilityPolynomials) else stability_polynomials(scheme)
    pts = trace_boundary(polys, n_points=512).points
    re = np.linspace(pts.real.min() - pad, pts.real.max() + pad, n_grid)
    im = np.linspace(pts.imag.min() - pad, pts.imag.max() + pad, n_grid)
    Z = re[None, :] + 1j * im[:, None]
    Rz = polyval(Z, polys.main)
    Ez = polyval(Z, polys.diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (Z * polyval(Z, polyder(polys.main)) / Rz).real
        e = (Z * polyval(Z, polyder(polys.diff)) / Ez).real
    ok = (np.abs(Rz) >= DEGENERATE_TOL) & (np.abs(Ez) >= DEGENERATE_TOL)
    rho = np.full(Z.shape, np.nan)
    if np.any(ok):
        rho[ok] = _rho_batch(r[ok].ravel(), e[ok].ravel(), beta, k)
    return Z, rho


# ---------------------------------------------------------------------------
# spectral radius by independent routes (cross-checked in the test suite)

def spectral_radius(M, method="eig"):
    M = np.asarray(M, dtype=complex)
    if method == "eig":
        return float(np.max(np.abs(np.linalg.eigvals(M))))
    if method == "charpoly":
        return float(np.max(np.abs(np.roots(_charpoly_leverrier(M)))))
    if method == "power":
        return _power_iteration_radius(M)
    raise ValueError(f"unknown method {method!r}")


def _charpoly_leverrier(M):
    """Characteristic polynomial by the Faddeev-LeVerrier trace recursion."""
    n = M.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    N = np.zeros_like(M)
    for m in range(1, n + 1):
        N = M @ N + coeffs[m - 1] * np.eye(n)
        coeffs[m] = -np.trace(M @ N) / m
    return coeffs


def _power_iteration_radius(M, iters=3000, seed=7):
    """Largest eigenvalue modulus via shifted power iteration with deflation.

    A random complex shift splits conjugate-pair moduli so plain power
    iteration converges; each converged eigenpair is deflated by a unitary
    similarity and the procedure recurses on the trailing block.
    """
    rng = np.random.default_rng(seed)
    M = np.asarray(M, dtype=complex)
    radius = 0.0
    work = M.copy()
    while work.shape[0] > 0:
        n = work.shape[0]
        if n == 1:
            radius = max(radius, abs(work[0, 0]))
            break
        scale = max(np.max(np.abs(work)), 1.0)
        mu = scale * (0.37 + 0.61j)   # fixed generic shift
        S = work + mu * np.eye(n)
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            v_new = S @ v
            nv = np.linalg.norm(v_new)
            if nv == 0:
                break
            v_new /= nv
            lam_new = np.vdot(v_new, S @ v_new)
            if abs(lam_new - lam) < 1e-13 * max(1.0, abs(lam_new)):
                lam = lam_new
                v = v_new
                break
            lam, v = lam_new, v_new
        radius = max(radius, abs(lam - mu))
        # unitary deflation: map v to e1, recurse on the trailing block
        H = _householder(v)
        work = (H @ work @ H.conj().T)[1:, 1:]
    return float(radius)


def _householder(v):
    n = len(v)
    e1 = np.zeros(n, dtype=complex)
    e1[0] = 1.0
    phase = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0
    w = v + phase * np.linalg.norm(v) * e1
    w /= np.linalg.norm(w)
    return np.eye(n, dtype=complex) - 2.0 * np.outer(w, w.conj())
