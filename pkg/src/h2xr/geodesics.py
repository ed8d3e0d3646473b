"""Unit-speed geodesic integration with parallel frame transport.

The integrator is a classical fixed-step RK4 on the combined state
(q, v, e1, e2); the frame is transported in the same step so geodesic and
frame stay phase locked.  Batches of initial conditions integrate
simultaneously as (B, 12) arrays, which is what makes the large scans in
the conjugate-point module affordable.

Trajectories approaching the chart boundary y <= Y_FLOOR are truncated
and flagged rather than re-charted; non-finite states abort the run.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericsError
from .metrics import (
    ChartPoint,
    MetricSpec,
    _warp_radius_and_grad,
    christoffel_many,
    metric_many,
)

DEFAULT_STEP = 1e-3
Y_FLOOR = 1e-6
UNIT_SPEED_TOL = 1e-9
ADAPTIVE_TOL = 1e-10


@dataclass(frozen=True)
class PhaseState:
    """Point plus unit coordinate velocity."""

    q: ChartPoint
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "v", np.asarray(self.v, dtype=float))

    @staticmethod
    def checked(spec: MetricSpec, q: ChartPoint, v) -> "PhaseState":
        v = np.asarray(v, dtype=float)
        s = float(np.einsum("ij,i,j->", metric_many(spec, q.as_array()[None, :])[0], v, v))
        if abs(s - 1.0) > UNIT_SPEED_TOL:
            raise DomainError(f"velocity is not unit speed: g(v, v) = {s}")
        return PhaseState(q, v)


@dataclass(frozen=True)
class Trajectory:
    """Sampled geodesic with an attached parallel orthonormal frame.

    e3 of the frame is the tangent itself; e1, e2 span its normal bundle
    (for a horizontal run on the product: in-surface normal, then
    vertical).  frame arrays are None when integrated without transport.
    """

    spec: MetricSpec
    times: np.ndarray          # (N,)
    q: np.ndarray              # (N, 3)
    v: np.ndarray              # (N, 3)
    e1: np.ndarray | None      # (N, 3)
    e2: np.ndarray | None
    step: float
    T: float
    truncated: bool = False

    @property
    def n_samples(self) -> int:
        return len(self.times)

    @property
    def has_frame(self) -> bool:
        return self.e1 is not None

    def state(self, k: int) -> PhaseState:
        x, y, t = self.q[k]
        return PhaseState(ChartPoint(float(x), float(y), float(t)), self.v[k].copy())

    def csv_rows(self):
        for k in range(self.n_samples):
            yield (self.times[k], *self.q[k], *self.v[k])


def unit_vector(spec: MetricSpec, q: ChartPoint, v) -> np.ndarray:
    """Normalize a coordinate vector to unit speed at q."""
    v = np.asarray(v, dtype=float)
    g = metric_many(spec, q.as_array()[None, :])[0]
    n2 = float(np.einsum("ij,i,j->", g, v, v))
    if not (n2 > 0.0 and math.isfinite(n2)):
        raise DomainError("cannot normalize a null or non-finite vector")
    return v / math.sqrt(n2)


def initial_frame(spec: MetricSpec, q: ChartPoint, v) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic g-orthonormal basis (e1, e2) of the normal bundle at q.

    Gram-Schmidt of the coordinate directions (d_x, d_y, d_t), in that
    order, against the tangent.  For a horizontal product geodesic this
    yields (in-surface normal, vertical).
    """
    g = metric_many(spec, q.as_array()[None, :])[0]
    v = np.asarray(v, dtype=float)
    accepted = [v / math.sqrt(float(np.einsum("ij,i,j->", g, v, v)))]
    out = []
    for m in range(3):
        c = np.zeros(3)
        c[m] = 1.0
        w = c.copy()
        for p in accepted:
            w = w - float(np.einsum("ij,i,j->", g, w, p)) * p
        n2 = float(np.einsum("ij,i,j->", g, w, w))
        if n2 <= 1e-12 * float(g[m, m]):
            continue  # candidate parallel to the tangent
        w = w / math.sqrt(n2)
        accepted.append(w)
        out.append(w)
        if len(out) == 2:
            return out[0], out[1]
    raise DomainError("degenerate initial frame")


def _rhs(spec: MetricSpec, state: np.ndarray, nvec: int) -> np.ndarray:
    """Batched derivative of (q, v, transported vectors).

    Product and Warped use fused closed-form contractions (the integrator
    hot path); other kinds fall back to the generic Christoffel contraction.
    """
    B = state.shape[0]
    q = state[:, 0:3]
    w = np.ascontiguousarray(state[:, 3:]).reshape(B, nvec, 3)
    out = np.empty_like(state)
    out[:, 0:3] = state[:, 3:6]
    dw = np.empty((B, nvec, 3))

    if spec.kind in ("Product", "Warped"):
        inv_y = 1.0 / q[:, 1:2]
        vx = state[:, 3:4]
        vy = state[:, 4:5]
        wx, wy = w[:, :, 0], w[:, :, 1]
        # hyperbolic base block: -Gamma^x = (vx wy + vy wx)/y, etc.
        dw[:, :, 0] = (vx * wy + vy * wx) * inv_y
        dw[:, :, 1] = (vy * wy - vx * wx) * inv_y
        dw[:, :, 2] = 0.0
        if spec.kind == "Warped":
            rho, drx, dry = _warp_radius_and_grad(spec.warp, q)
            f, fp, _ = spec.warp.eval_many(rho)
            dfx = (fp * drx)[:, None]
            dfy = (fp * dry)[:, None]
            vt = state[:, 5:6]
            wt = w[:, :, 2]
            fcol = f[:, None]
            y2f = (q[:, 1] ** 2 * f)[:, None]
            dw[:, :, 0] += y2f * dfx * (vt * wt)
            dw[:, :, 1] += y2f * dfy * (vt * wt)
            dw[:, :, 2] = -(dfx * (vx * wt + vt * wx) + dfy * (vy * wt + vt * wy)) / fcol
        out[:, 3:] = dw.reshape(B, nvec * 3)
        return out

    gam = christoffel_many(spec, q)
    dw = -np.einsum("bkij,bi,bnj->bnk", gam, w[:, 0], w)
    out[:, 3:] = dw.reshape(B, nvec * 3)
    return out


def _rk4_step(spec: MetricSpec, state: np.ndarray, h: float, nvec: int) -> np.ndarray:
    k1 = _rhs(spec, state, nvec)
    k2 = _rhs(spec, state + (0.5 * h) * k1, nvec)
    k3 = _rhs(spec, state + (0.5 * h) * k2, nvec)
    k4 = _rhs(spec, state + h * k3, nvec)
    return state + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate_batch(spec, q0s, v0s, T, step, with_frame):
    """Fixed-step batched integration; returns per-row sample arrays."""
    if not (T > 0.0 and math.isfinite(T)):
        raise DomainError(f"total time must be > 0, got {T}")
    if not (step > 0.0 and math.isfinite(step)):
        raise DomainError(f"step must be > 0, got {step}")
    q0s = np.asarray(q0s, dtype=float)
    v0s = np.asarray(v0s, dtype=float)
    B = q0s.shape[0]
    nvec = 3 if with_frame else 1
    dim = 3 + 3 * nvec

    state = np.empty((B, dim))
    state[:, 0:3] = q0s
    state[:, 3:6] = v0s
    if with_frame:
        for b in range(B):
            x, y, t = q0s[b]
            e1, e2 = initial_frame(spec, ChartPoint(float(x), float(y), float(t)), v0s[b])
            state[b, 6:9] = e1
            state[b, 9:12] = e2

    n_full = int(math.floor(T / step + 1e-9))
    rem = T - n_full * step
    haves_partial = rem > 1e-12 * max(1.0, T)
    n_steps = n_full + (1 if haves_partial else 0)

    times = np.empty(n_steps + 1)
    times[: n_full + 1] = np.arange(n_full + 1) * step
    if haves_partial:
        times[-1] = T

    samples = np.empty((B, n_steps + 1, dim))
    samples[:, 0] = state
    active = np.ones(B, dtype=bool)
    counts = np.full(B, 1, dtype=int)

    for k in range(n_steps):
        h = times[k + 1] - times[k]
        if not np.any(active):
            break
        new = _rk4_step(spec, state, h, nvec)
        if not np.all(np.isfinite(new[active])):
            bad = np.where(active & ~np.all(np.isfinite(new), axis=1))[0]
            raise NumericsError("non-finite integrator state", rows=bad.tolist(), time=times[k])
        crossed = new[:, 1] <= Y_FLOOR
        stop = active & crossed
        active = active & ~crossed
        state = np.where(active[:, None], new, state)
        samples[active, k + 1] = new[active]
        counts[active] += 1

    trajectories = []
    for b in range(B):
        n = counts[b]
        trunc = n < n_steps + 1
        e1 = samples[b, :n, 6:9].copy() if with_frame else None
        e2 = samples[b, :n, 9:12].copy() if with_frame else None
        trajectories.append(
            Trajectory(
                spec=spec,
                times=times[:n].copy(),
                q=samples[b, :n, 0:3].copy(),
                v=samples[b, :n, 3:6].copy(),
                e1=e1,
                e2=e2,
                step=step,
                T=float(times[n - 1]),
                truncated=bool(trunc),
            )
        )
    return trajectories


def integrate_geodesic(spec: MetricSpec, q0: ChartPoint, v0, T: float,
                       step: float = DEFAULT_STEP, frame: bool = True,
                       adaptive: bool = False) -> Trajectory:
    """Integrate one unit-speed geodesic from (q0, v0) for time T.

    v0 must already be unit speed (use unit_vector to normalize).  The
    default is the fixed-step method for reproducibility; adaptive=True
    switches to step-doubling local-error control at ADAPTIVE_TOL.
    """
    v0 = np.asarray(v0, dtype=float)
    PhaseState.checked(spec, q0, v0)
    if q0.y <= Y_FLOOR:
        raise DomainError(f"start point below the chart floor y = {Y_FLOOR}")
    if adaptive:
        return _integrate_adaptive(spec, q0, v0, T, step, frame)
    return _integrate_batch(spec, q0.as_array()[None, :], v0[None, :], T, step, frame)[0]


def integrate_geodesic_batch(spec: MetricSpec, q0s, v0s, T: float,
                             step: float = DEFAULT_STEP, frame: bool = True):
    """Integrate many geodesics at once; returns a list of Trajectory."""
    q0s = np.asarray(q0s, dtype=float)
    v0s = np.asarray(v0s, dtype=float)
    g = metric_many(spec, q0s)
    speeds = np.einsum("bij,bi,bj->b", g, v0s, v0s)
    if np.any(np.abs(speeds - 1.0) > UNIT_SPEED_TOL):
        raise DomainError("batch contains non-unit initial velocities")
    return _integrate_batch(spec, q0s, v0s, T, step, frame)


def _integrate_adaptive(spec, q0, v0, T, step, with_frame):
    nvec = 3 if with_frame else 1
    state = np.empty((1, 3 + 3 * nvec))
    state[0, 0:3] = q0.as_array()
    state[0, 3:6] = v0
    if with_frame:
        e1, e2 = initial_frame(spec, q0, v0)
        state[0, 6:9] = e1
        state[0, 9:12] = e2

    times = [0.0]
    rows = [state[0].copy()]
    t = 0.0
    h = step
    truncated = False
    while t < T - 1e-14:
        h = min(h, T - t)
        full = _rk4_step(spec, state, h, nvec)
        half = _rk4_step(spec, _rk4_step(spec, state, 0.5 * h, nvec), 0.5 * h, nvec)
        err = float(np.max(np.abs(half - full))) / 15.0
        scale = ADAPTIVE_TOL * (1.0 + float(np.max(np.abs(state))))
        if err <= scale:
            state = half + (half - full) / 15.0
            t += h
            if not np.all(np.isfinite(state)):
                raise NumericsError("non-finite integrator state", time=t)
            if state[0, 1] <= Y_FLOOR:
                truncated = True
                break
            times.append(t)
            rows.append(state[0].copy())
        factor = 0.9 * (scale / err) ** 0.2 if err > 0 else 2.0
        h = h * min(2.0, max(0.2, factor))

    arr = np.array(rows)
    return Trajectory(
        spec=spec,
        times=np.array(times),
        q=arr[:, 0:3],
        v=arr[:, 3:6],
        e1=arr[:, 6:9] if with_frame else None,
        e2=arr[:, 9:12] if with_frame else None,
        step=step,
        T=float(times[-1]),
        truncated=truncated,
    )


def parallel_frame(traj: Trajectory) -> Trajectory:
    """Return the trajectory with its parallel frame filled.

    A trajectory integrated without the frame is re-run from its initial
    data with transport switched on, so frame and geodesic are produced by
    the same phase-locked integration.
    """
    if traj.has_frame:
        return traj
    x, y, t = traj.q[0]
    q0 = ChartPoint(float(x), float(y), float(t))
    return integrate_geodesic(traj.spec, q0, traj.v[0], traj.T, traj.step, frame=True)


def speed_drift(traj: Trajectory) -> float:
    """max_t |g(v, v) - 1| over the samples."""
    g = metric_many(traj.spec, traj.q)
    s = np.einsum("kij,ki,kj->k", g, traj.v, traj.v)
    return float(np.max(np.abs(s - 1.0)))


def frame_gram_error(traj: Trajectory) -> float:
    """max deviation of the (e1, e2, e3) Gram matrix from the identity."""
    if not traj.has_frame:
        raise DomainError("trajectory has no frame")
    g = metric_many(traj.spec, traj.q)
    vecs = np.stack([traj.e1, traj.e2, traj.v], axis=1)  # (N, 3, 3)
    gram = np.einsum("kij,kai,kbj->kab", g, vecs, vecs)
    return float(np.max(np.abs(gram - np.eye(3))))
