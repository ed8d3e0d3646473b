"""Metric families on the chart H^2 x R and their curvature.

Three declarative families, all evaluated in coordinates (x, y, t) with
y > 0 and t the fiber coordinate:

  Product  g = (dx^2 + dy^2)/y^2 + L^2 dt^2
  Warped   g = (dx^2 + dy^2)/y^2 + f(p)^2 dt^2, f a radial C^2 bump profile
  Twisted  g = (dx^2 + dy^2)/y^2 + (1 + alpha h)^2 dt^2, h a registered
           potential; the first-order fiber shear generated by h

Christoffel symbols are analytic for Product and Warped and generic
central finite differences (one Richardson level) for Twisted.  The
curvature tensor is always assembled from Christoffels with
finite-difference derivatives, then projected onto its symmetry class;
the pre-projection residual is kept as a quality metric.

Index conventions, used consistently everywhere downstream:

  Gamma[k, i, j]    = Gamma^k_{ij}
  R4[i, j, k, l]    = g(R(d_i, d_j) d_l, d_k),  so the sectional curvature
                      of the (i, j) coordinate plane is
                      R4[i,j,i,j] / (g_ii g_jj - g_ij^2)
  Ric[j, k]         = g^{il} R4[i, j, l, k]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericsError
from .hyperbolic import HPoint

KINDS = ("Product", "Warped", "Twisted")

CHRISTOFFEL_FD_STEP = 1e-5   # Twisted metric derivatives, with Richardson
CURVATURE_FD_STEP = 1e-4     # dGamma central differences

_ACOSH_CUT = 1e-8


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates (x, y, t) on the chart, y > 0."""

    x: float
    y: float
    t: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(c) for c in (self.x, self.y, self.t)):
            raise DomainError("non-finite chart point")
        if self.y <= 0.0:
            raise DomainError(f"chart point needs y > 0, got y = {self.y}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.t], dtype=float)


# ---------------------------------------------------------------------------
# warp profile
# ---------------------------------------------------------------------------

def _smoothstep5(u):
    """Quintic smoothstep with two vanishing derivatives at both ends."""
    s = u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
    ds = 30.0 * u * u * (1.0 - u) ** 2
    dds = 60.0 * u * (1.0 - u) * (1.0 - 2.0 * u)
    return s, ds, dds


@dataclass(frozen=True)
class WarpProfile:
    """Radial bump profile: quadratic cap, C^2 quintic blend to f == 1.

    f(r) = 1 + eps/2 - eps r^2 on [0, r0], f == 1 for r >= r1, and on
    [r0, r1] the deviation from 1 is faded out by a quintic smoothstep,
    which preserves f, f', f'' at both junctions.
    """

    center: HPoint
    eps: float
    r0: float = 0.5
    r1: float = 0.75

    def __post_init__(self):
        if not (self.eps > 0.0 and math.isfinite(self.eps)):
            raise DomainError(f"warp eps must be > 0, got {self.eps}")
        if not (0.0 < self.r0 < self.r1):
            raise DomainError(f"need 0 < r0 < r1, got ({self.r0}, {self.r1})")
        fmin = float(np.min(self.eval_many(np.linspace(0.0, self.r1, 257))[0]))
        if fmin <= 0.0:
            raise DomainError(f"profile not positive (min f = {fmin}); eps too large")

    def eval_many(self, r):
        """Vectorized (f, f', f'') at radii r >= 0."""
        r = np.asarray(r, dtype=float)
        dev = self.eps * (0.5 - r * r)        # quadratic cap minus 1
        ddev = -2.0 * self.eps * r
        dddev = np.full_like(r, -2.0 * self.eps)

        width = self.r1 - self.r0
        u = np.clip((r - self.r0) / width, 0.0, 1.0)
        s, ds, dds = _smoothstep5(u)
        w = 1.0 - s
        dw = -ds / width
        ddw = -dds / (width * width)

        f = 1.0 + dev * w
        fp = ddev * w + dev * dw
        fpp = dddev * w + 2.0 * ddev * dw + dev * ddw

        outside = r >= self.r1
        f = np.where(outside, 1.0, f)
        fp = np.where(outside, 0.0, fp)
        fpp = np.where(outside, 0.0, fpp)
        return f, fp, fpp


def warp_profile_eval(profile: WarpProfile, r: float):
    """(f, f', f'') of the profile at a single radius r >= 0."""
    if r < 0.0 or not math.isfinite(r):
        raise DomainError(f"radius must be >= 0, got {r}")
    f, fp, fpp = profile.eval_many(np.array([r]))
    return float(f[0]), float(fp[0]), float(fpp[0])


# ---------------------------------------------------------------------------
# twisted potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """Analytic potential h(x, y) with optional closed-form derivatives.

    grad returns coordinate partials (h_x, h_y); hess the covariant Hessian
    in lowered coordinates.  Both are only needed by oracles and tests.
    """

    fn: object
    grad: object = None
    hess: object = None


_POTENTIALS: dict[str, Potential] = {}


def register_potential(name: str, fn, grad=None, hess=None) -> None:
    _POTENTIALS[name] = Potential(fn, grad, hess)


def get_potential(name: str) -> Potential:
    try:
        return _POTENTIALS[name]
    except KeyError:
        raise DomainError(
            f"unknown potential {name!r}; registered: {sorted(_POTENTIALS)}"
        ) from None


register_potential(
    "log_y",
    fn=lambda x, y: np.log(y),
    grad=lambda x, y: (np.zeros_like(x), 1.0 / y),
    hess=lambda x, y: np.stack(
        [
            np.stack([-1.0 / (y * y), np.zeros_like(x)], axis=-1),
            np.stack([np.zeros_like(x), np.zeros_like(x)], axis=-1),
        ],
        axis=-2,
    ),
)
register_potential(
    "x",
    fn=lambda x, y: x + np.zeros_like(y),
    grad=lambda x, y: (np.ones_like(x), np.zeros_like(y)),
    hess=lambda x, y: np.stack(
        [
            np.stack([np.zeros_like(x), 1.0 / y], axis=-1),
            np.stack([1.0 / y, np.zeros_like(x)], axis=-1),
        ],
        axis=-2,
    ),
)


# ---------------------------------------------------------------------------
# metric specs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSpec:
    """Declarative metric description; immutable and hashable."""

    kind: str
    L: float = 1.0
    warp: WarpProfile | None = None
    alpha: float = 0.0
    potential: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown metric kind {self.kind!r}")
        if self.kind == "Product" and not (self.L > 0.0 and math.isfinite(self.L)):
            raise DomainError(f"fiber length L must be > 0, got {self.L}")
        if self.kind == "Warped" and self.warp is None:
            raise DomainError("Warped spec needs a WarpProfile")
        if self.kind == "Twisted":
            if self.potential is None:
                raise DomainError("Twisted spec needs a registered potential")
            get_potential(self.potential)
            if not math.isfinite(self.alpha):
                raise DomainError("twist amplitude must be finite")

    @classmethod
    def product(cls, L: float = 1.0) -> "MetricSpec":
        return cls(kind="Product", L=L)

    @classmethod
    def warped(cls, eps: float, center: HPoint = HPoint(0.0, 1.0),
               r0: float = 0.5, r1: float = 0.75) -> "MetricSpec":
        return cls(kind="Warped", warp=WarpProfile(center, eps, r0, r1))

    @classmethod
    def twisted(cls, alpha: float, potential: str = "log_y") -> "MetricSpec":
        return cls(kind="Twisted", alpha=alpha, potential=potential)


# ---------------------------------------------------------------------------
# batched evaluation helpers
# ---------------------------------------------------------------------------

def _check_points(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape[-1] != 3:
        raise DomainError(f"points must have shape (..., 3), got {q.shape}")
    y = q[..., 1]
    if not np.all(np.isfinite(q)):
        raise DomainError("non-finite point in batch")
    if np.any(y <= 0.0):
        raise DomainError("point with y <= 0 in batch")
    return q


def _warp_radius_and_grad(profile: WarpProfile, q: np.ndarray):
    """Hyperbolic radius from the warp center and its coordinate partials."""
    cx, cy = profile.center.x, profile.center.y
    x, y = q[..., 0], q[..., 1]
    dx = x - cx
    dy = y - cy
    u = (dx * dx + dy * dy) / (2.0 * cy * y)
    rho = np.where(
        u < _ACOSH_CUT, np.sqrt(2.0 * u), np.log1p(u + np.sqrt(u * (u + 2.0)))
    )
    du_x = dx / (cy * y)
    du_y = dy / (cy * y) - u / y
    root = np.sqrt(u * (u + 2.0))
    safe = root > 1e-30
    inv = np.where(safe, 1.0 / np.where(safe, root, 1.0), 0.0)
    return rho, du_x * inv, du_y * inv


def fiber_scale_many(spec: MetricSpec, q) -> np.ndarray:
    """sqrt(g_tt): L, the warp factor f, or the shear factor 1 + alpha h."""
    q = _check_points(q)
    if spec.kind == "Product":
        return np.full(q.shape[:-1], spec.L)
    if spec.kind == "Warped":
        rho, _, _ = _warp_radius_and_grad(spec.warp, q)
        return spec.warp.eval_many(rho)[0]
    h = get_potential(spec.potential).fn(q[..., 0], q[..., 1])
    f = 1.0 + spec.alpha * h
    if np.any(f <= 0.0):
        raise DomainError("shear factor 1 + alpha h reached zero in batch")
    return f


def metric_many(spec: MetricSpec, q) -> np.ndarray:
    """Metric components g_{ij}(q) for a batch of points, shape (..., 3, 3)."""
    q = _check_points(q)
    y = q[..., 1]
    g = np.zeros(q.shape[:-1] + (3, 3))
    inv_y2 = 1.0 / (y * y)
    g[..., 0, 0] = inv_y2
    g[..., 1, 1] = inv_y2
    g[..., 2, 2] = fiber_scale_many(spec, q) ** 2
    return g


def metric_at(spec: MetricSpec, p: ChartPoint) -> np.ndarray:
    return metric_many(spec, p.as_array()[None, :])[0]


def volume_density_many(spec: MetricSpec, q) -> np.ndarray:
    """sqrt(det g) in chart coordinates."""
    q = _check_points(q)
    y = q[..., 1]
    return fiber_scale_many(spec, q) / (y * y)


def christoffel_many(spec: MetricSpec, q) -> np.ndarray:
    """Christoffel symbols Gamma[..., k, i, j] for a batch of points."""
    q = _check_points(q)
    y = q[..., 1]
    gam = np.zeros(q.shape[:-1] + (3, 3, 3))
    inv_y = 1.0 / y
    # hyperbolic base block, shared by all three families
    gam[..., 0, 0, 1] = -inv_y
    gam[..., 0, 1, 0] = -inv_y
    gam[..., 1, 0, 0] = inv_y
    gam[..., 1, 1, 1] = -inv_y

    if spec.kind == "Product":
        return gam

    if spec.kind == "Warped":
        rho, drho_x, drho_y = _warp_radius_and_grad(spec.warp, q)
        f, fp, _ = spec.warp.eval_many(rho)
        df = np.stack([fp * drho_x, fp * drho_y], axis=-1)
        y2 = (y * y)[..., None]
        gam[..., 2, 0:2, 2] = df / f[..., None]
        gam[..., 2, 2, 0:2] = gam[..., 2, 0:2, 2]
        gam[..., 0:2, 2, 2] = -f[..., None] * y2 * df
        return gam

    return _christoffel_fd(spec, q)


def _fd_shift(q: np.ndarray, m: int, h: np.ndarray) -> np.ndarray:
    out = q.copy()
    out[..., m] = out[..., m] + h
    return out


def _christoffel_fd(spec: MetricSpec, q: np.ndarray) -> np.ndarray:
    """Generic symbols from Richardson-extrapolated metric derivatives.

    Steps scale with the local y so the relative accuracy is uniform
    across the chart (the metric varies on the hyperbolic length scale,
    which is ~y in coordinates).
    """
    ymin = float(np.min(q[..., 1]))
    if ymin < 1e-12:
        raise NumericsError(
            "finite-difference step underflow near the chart boundary", y_min=ymin
        )
    h = CHRISTOFFEL_FD_STEP * q[..., 1]
    g = metric_many(spec, q)
    dg = np.empty(q.shape[:-1] + (3, 3, 3))  # dg[..., m, i, j] = d_m g_ij
    for m in range(3):
        d1 = (metric_many(spec, _fd_shift(q, m, h)) - metric_many(spec, _fd_shift(q, m, -h))) / (
            2.0 * h[..., None, None]
        )
        d2 = (
            metric_many(spec, _fd_shift(q, m, 0.5 * h))
            - metric_many(spec, _fd_shift(q, m, -0.5 * h))
        ) / h[..., None, None]
        dg[..., m, :, :] = (4.0 * d2 - d1) / 3.0
    ginv = np.linalg.inv(g)
    # Gamma^k_ij = 1/2 g^{kl} (d_i g_lj + d_j g_li - d_l g_ij)
    lower = 0.5 * (
        np.einsum("...ilj->...lij", dg) + np.einsum("...jli->...lij", dg)
        - np.einsum("...lij->...lij", dg)
    )
    return np.einsum("...kl,...lij->...kij", ginv, lower)


def christoffel_at(spec: MetricSpec, p: ChartPoint) -> np.ndarray:
    return christoffel_many(spec, p.as_array()[None, :])[0]


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvatureSample:
    """Lowered curvature tensor at a point plus derived summaries."""

    point: ChartPoint
    riemann: np.ndarray                 # R4[i, j, k, l], symmetrized
    sectionals: dict = field(default_factory=dict)
    ricci: np.ndarray | None = None
    presym_residual: float = 0.0


def _symmetry_project(r4: np.ndarray) -> np.ndarray:
    """Project onto tensors with the algebraic curvature symmetries."""
    t = r4
    t = 0.5 * (t - np.swapaxes(t, -4, -3))                       # antisym (i, j)
    t = 0.5 * (t - np.swapaxes(t, -2, -1))                       # antisym (k, l)
    pair = np.moveaxis(t, (-4, -3, -2, -1), (-2, -1, -4, -3))    # (kl)(ij)
    return 0.5 * (t + pair)


def curvature_tensor_many(spec: MetricSpec, q, step: float = CURVATURE_FD_STEP):
    """(R4, presym residual) for a batch of points.

    R4[..., i, j, k, l] = g(R(d_i, d_j) d_l, d_k) with dGamma by central
    finite differences of christoffel_many.
    """
    q = _check_points(q)
    gam = christoffel_many(spec, q)
    h = step * q[..., 1]  # y-scaled, see _christoffel_fd
    dgam = np.empty(q.shape[:-1] + (3, 3, 3, 3))  # [..., m, k, i, j] = d_m Gamma^k_ij
    for m in range(3):
        dgam[..., m, :, :, :] = (
            christoffel_many(spec, _fd_shift(q, m, h))
            - christoffel_many(spec, _fd_shift(q, m, -h))
        ) / (2.0 * h[..., None, None, None])
    # R^m_{l i j} = d_i Gamma^m_jl - d_j Gamma^m_il
    #              + Gamma^m_ia Gamma^a_jl - Gamma^m_ja Gamma^a_il
    gg = np.einsum("...mia,...ajl->...mlij", gam, gam, optimize=True)
    rup = (
        np.moveaxis(dgam, (-4, -3, -2, -1), (-2, -4, -1, -3))
        - np.moveaxis(dgam, (-4, -3, -2, -1), (-1, -4, -2, -3))
        + gg
        - np.moveaxis(gg, (-2, -1), (-1, -2))
    )
    g = metric_many(spec, q)
    r4_raw = np.einsum("...km,...mlij->...ijkl", g, rup, optimize=True)
    r4 = _symmetry_project(r4_raw)
    residual = np.max(np.abs(r4_raw - r4), axis=(-4, -3, -2, -1))
    return r4, residual


def curvature_at(spec: MetricSpec, p: ChartPoint) -> CurvatureSample:
    q = p.as_array()[None, :]
    r4, res = curvature_tensor_many(spec, q)
    r4 = r4[0]
    g = metric_at(spec, p)
    ginv = np.linalg.inv(g)
    sectionals = {}
    for i, j in ((0, 1), (0, 2), (1, 2)):
        denom = g[i, i] * g[j, j] - g[i, j] ** 2
        sectionals[(i, j)] = float(r4[i, j, i, j] / denom)
    ricci = np.einsum("il,ijlk->jk", ginv, r4)
    return CurvatureSample(
        point=p,
        riemann=r4,
        sectionals=sectionals,
        ricci=ricci,
        presym_residual=float(res[0]),
    )


def bianchi_residual(r4: np.ndarray) -> float:
    """Max first-Bianchi residual of a lowered curvature tensor."""
    # cyclic sum over the first three slots of Rm; Rm(i,j,k,l) = R4[i,j,l,k]
    rm = np.swapaxes(r4, -2, -1)
    cyc = rm + np.moveaxis(rm, (-4, -3, -2), (-2, -4, -3)) + np.moveaxis(
        rm, (-4, -3, -2), (-3, -2, -4)
    )
    return float(np.max(np.abs(cyc)))


def _unit_vertical(g: np.ndarray) -> np.ndarray:
    v = np.zeros(g.shape[:-2] + (3,))
    v[..., 2] = 1.0 / np.sqrt(g[..., 2, 2])
    return v


def horizontal_frame(g: np.ndarray) -> np.ndarray:
    """g-orthonormal basis (e_x-ish, e_y-ish) of the vertical complement.

    Gram-Schmidt of the coordinate vectors d_x, d_y against the unit
    vertical direction; shape (..., 2, 3).
    """
    v = _unit_vertical(g)
    basis = []
    prev = [v]
    for m in range(2):
        w = np.zeros(g.shape[:-2] + (3,))
        w[..., m] = 1.0
        for p in prev:
            coef = np.einsum("...ij,...i,...j->...", g, w, p)
            w = w - coef[..., None] * p
        norm = np.sqrt(np.einsum("...ij,...i,...j->...", g, w, w))
        w = w / norm[..., None]
        prev.append(w)
        basis.append(w)
    return np.stack(basis, axis=-2)


def r_v_operator_many(spec: MetricSpec, q) -> np.ndarray:
    """Matrix of X -> R(X, V)V on the horizontal plane, orthonormal basis."""
    q = _check_points(q)
    r4, _ = curvature_tensor_many(spec, q)
    g = metric_many(spec, q)
    v = _unit_vertical(g)
    e = horizontal_frame(g)
    m = np.einsum("...ai,...j,...bk,...l,...ijkl->...ab", e, v, e, v, r4)
    return 0.5 * (m + np.swapaxes(m, -2, -1))


def r_v_operator(spec: MetricSpec, p: ChartPoint) -> np.ndarray:
    return r_v_operator_many(spec, p.as_array()[None, :])[0]
