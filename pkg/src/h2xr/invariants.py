"""Closed-form invariant calculators for the product geometry.

Ingested surface spectra (never computed here), the additive product
Laplace spectrum, spectral gap, marked length spectrum enumeration from
holonomy generators, the isoperimetric bound with its tube test regions,
the explicit curvature-gap constant, the integral curvature-deviation
functional, and the moduli dimension count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hyperbolic import (
    HYPERBOLIC_TRACE_MARGIN,
    MobiusElement,
    translation_length,
)
from .metrics import (
    MetricSpec,
    christoffel_many,
    fiber_scale_many,
    metric_many,
    r_v_operator_many,
    volume_density_many,
)

MAX_WORD_LENGTH = 8
DEDUP_TOL = 1e-9


# ---------------------------------------------------------------------------
# spectra
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaSpectrum:
    """Sorted Laplace eigenvalues of the base surface, with multiplicity."""

    eigenvalues: tuple

    def __post_init__(self):
        ev = tuple(float(v) for v in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", ev)
        if not ev:
            raise DomainError("spectrum is empty")
        if any(not math.isfinite(v) or v < 0.0 for v in ev):
            raise DomainError("eigenvalues must be finite and >= 0")
        if list(ev) != sorted(ev):
            raise DomainError("eigenvalues must be nondecreasing")
        if ev[0] != 0.0:
            raise DomainError("spectrum must start at 0 (connected surface)")
        if len(ev) > 1 and ev[1] == 0.0:
            raise DomainError("zero eigenvalue must be simple (connected surface)")

    @classmethod
    def from_file(cls, path) -> "SigmaSpectrum":
        values = []
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                try:
                    values.append(float(line))
                except ValueError as exc:
                    raise DomainError(f"{path}:{lineno}: {exc}") from exc
        return cls(tuple(sorted(values)))

    def first_positive(self) -> float:
        for v in self.eigenvalues:
            if v > 0.0:
                return v
        raise DomainError("spectrum has no positive eigenvalue")


def product_spectrum(sig: SigmaSpectrum, L: float, cutoff: float):
    """Eigenvalues lam + (2 pi n / L)^2 up to the cutoff, with multiplicity.

    Circle modes n != 0 carry multiplicity 2 (folded onto |n|).  Returns a
    sorted list of (eigenvalue, multiplicity) with exactly equal values
    merged.
    """
    if not (L > 0.0 and math.isfinite(L)):
        raise DomainError(f"fiber length must be > 0, got {L}")
    if not (cutoff > 0.0 and math.isfinite(cutoff)):
        raise DomainError(f"cutoff must be > 0, got {cutoff}")
    merged: dict[float, int] = {}
    for lam in sig.eigenvalues:
        if lam <= cutoff:
            merged[lam] = merged.get(lam, 0) + 1
        n = 1
        while True:
            val = lam + (2.0 * math.pi * n / L) ** 2
            if val > cutoff:
                break
            merged[val] = merged.get(val, 0) + 2
            n += 1
    return sorted(merged.items())


def spectral_gap(sig: SigmaSpectrum, L: float) -> float:
    """min(lambda_1 of the surface, (2 pi / L)^2), the first nonzero mode."""
    if not (L > 0.0 and math.isfinite(L)):
        raise DomainError(f"fiber length must be > 0, got {L}")
    return min(sig.first_positive(), (2.0 * math.pi / L) ** 2)


# ---------------------------------------------------------------------------
# marked length spectrum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LengthEntry:
    """One free-homotopy class (word, n) with its closed geodesic length."""

    word: str
    trace: float
    ell_sigma: float
    n: int
    ell: float


def mls_length(ell_sigma: float, n: int, L: float) -> float:
    """Pythagorean length sqrt(ell_sigma^2 + (n L)^2) of the class."""
    if not (L > 0.0 and math.isfinite(L)):
        raise DomainError(f"fiber length must be > 0, got {L}")
    if ell_sigma < 0.0 or not math.isfinite(ell_sigma):
        raise DomainError(f"surface length must be >= 0, got {ell_sigma}")
    if ell_sigma == 0.0 and n == 0:
        raise DomainError("(0, 0) is not a closed geodesic class")
    return math.hypot(ell_sigma, n * L)


def _reduced_words(n_gens: int, max_word: int):
    """All reduced words as tuples of symbol ids; id ^ 1 is the inverse."""
    out = []
    stack = [()]
    while stack:
        word = stack.pop()
        if word:
            out.append(word)
        if len(word) == max_word:
            continue
        for s in range(2 * n_gens):
            if word and word[-1] == s ^ 1:
                continue
            stack.append(word + (s,))
    out.sort(key=lambda w: (len(w), w))
    return out


def _word_label(word, n_gens: int) -> str:
    if not word:
        return "e"
    letters = []
    for s in word:
        base = chr(ord("a") + s // 2)
        letters.append(base.upper() if s % 2 else base)
    return "".join(letters)


def enumerate_length_spectrum(generators, max_word: int, L: float, n_max: int):
    """LengthEntry list over reduced words up to max_word and |n| <= n_max.

    Hyperbolic words contribute one entry per fiber winding n; the
    identity class contributes the pure fiber classes.  Entries are
    deduplicated by (|trace|, n) within DEDUP_TOL, a conjugacy-class
    proxy (trace is a class function, though not injective), and sorted
    by total length.
    """
    if not (0 <= max_word <= MAX_WORD_LENGTH):
        raise DomainError(f"max_word must be in [0, {MAX_WORD_LENGTH}], got {max_word}")
    if n_max < 0:
        raise DomainError(f"n_max must be >= 0, got {n_max}")
    if not (L > 0.0 and math.isfinite(L)):
        raise DomainError(f"fiber length must be > 0, got {L}")
    gens = list(generators)
    mats = []
    for g in gens:
        if not isinstance(g, MobiusElement):
            g = MobiusElement(*g)
        mats.append(g)
    symbols = []
    for m in mats:
        symbols.append(m)
        symbols.append(m.inverse())

    entries = []
    seen = []  # (|trace|, n) accepted keys, for tolerance dedup

    def accept(key) -> bool:
        tr, n = key
        for tr0, n0 in seen:
            if n0 == n and abs(tr0 - tr) <= DEDUP_TOL:
                return False
        seen.append(key)
        return True

    for n in range(-n_max, n_max + 1):
        if n == 0:
            continue
        if accept((2.0, n)):
            entries.append(LengthEntry("e", 2.0, 0.0, n, mls_length(0.0, n, L)))

    for word in _reduced_words(len(gens), max_word):
        m = symbols[word[0]]
        for s in word[1:]:
            m = m.compose(symbols[s])
        tr = m.trace
        if abs(tr) <= 2.0 + HYPERBOLIC_TRACE_MARGIN:
            continue  # elliptic/parabolic/identity word: no geodesic length
        ell_sigma = translation_length(m)
        label = _word_label(word, len(gens))
        for n in range(-n_max, n_max + 1):
            if accept((abs(tr), n)):
                entries.append(
                    LengthEntry(label, tr, ell_sigma, n, mls_length(ell_sigma, n, L))
                )
    entries.sort(key=lambda e: (e.ell, e.n, e.word))
    return entries


# ---------------------------------------------------------------------------
# isoperimetric profile
# ---------------------------------------------------------------------------

def isoperimetric_bound(v: float, L: float) -> float:
    """The profile lower bound 2 pi L sqrt(2v/(L pi) + (v/(2 pi L))^2)."""
    if v < 0.0 or not math.isfinite(v):
        raise DomainError(f"volume must be >= 0, got {v}")
    if not (L > 0.0 and math.isfinite(L)):
        raise DomainError(f"fiber length must be > 0, got {L}")
    return 2.0 * math.pi * L * math.sqrt(
        2.0 * v / (L * math.pi) + (v / (2.0 * math.pi * L)) ** 2
    )


@dataclass(frozen=True)
class TubeRow:
    """One comparison row: a candidate region vs the profile bound."""

    kind: str            # "disk" or "collar"
    param: float         # disk radius r or collar half-width w
    volume: float
    area: float
    bound: float
    area_minus_bound: float
    ratio: float         # area / bound
    status: str          # "area<bound" or "area>=bound"


def tube_profiles(L: float, r_list, ell_collar: float, w_list):
    """Boundary area vs bound for disk tubes D_r x S^1 and collar tubes.

    Disk tube: volume 2 pi L (cosh r - 1), boundary area 2 pi L sinh r.
    Collar of half-width w around a closed geodesic of length ell:
    volume 2 L ell sinh w, boundary area 2 L ell cosh w.
    """
    if not (L > 0.0 and math.isfinite(L)):
        raise DomainError(f"fiber length must be > 0, got {L}")
    if ell_collar <= 0.0 and w_list:
        raise DomainError(f"collar geodesic length must be > 0, got {ell_collar}")
    rows = []
    for r in r_list:
        if r <= 0.0:
            raise DomainError(f"disk radius must be > 0, got {r}")
        v = 2.0 * math.pi * L * (math.cosh(r) - 1.0)
        area = 2.0 * math.pi * L * math.sinh(r)
        rows.append(_tube_row("disk", r, v, area, L))
    for w in w_list:
        if w <= 0.0:
            raise DomainError(f"collar width must be > 0, got {w}")
        v = 2.0 * L * ell_collar * math.sinh(w)
        area = 2.0 * L * ell_collar * math.cosh(w)
        rows.append(_tube_row("collar", w, v, area, L))
    return rows


def _tube_row(kind, param, v, area, L):
    bound = isoperimetric_bound(v, L)
    diff = area - bound
    return TubeRow(
        kind=kind, param=param, volume=v, area=area, bound=bound,
        area_minus_bound=diff, ratio=area / bound,
        status="area<bound" if diff < 0.0 else "area>=bound",
    )


# ---------------------------------------------------------------------------
# curvature gap and deviation
# ---------------------------------------------------------------------------

def epsilon0(lambda1: float, L: float, diam: float):
    """(delta, eps0) = (min(lambda1/2, pi^2/L^2), delta/(4 (1 + diam^2)))."""
    for name, val in (("lambda1", lambda1), ("L", L), ("diam", diam)):
        if not (val > 0.0 and math.isfinite(val)):
            raise DomainError(f"{name} must be > 0, got {val}")
    delta = min(lambda1 / 2.0, math.pi ** 2 / L ** 2)
    return delta, delta / (4.0 * (1.0 + diam * diam))


@dataclass(frozen=True)
class DeviationEstimate:
    estimate: float
    std_error: float
    n_samples: int


def _vertical_gradient_sq(spec: MetricSpec, q: np.ndarray) -> np.ndarray:
    """|nabla V|^2 for the unit vertical field, batched.

    nabla_i V^k = d_i V^k + Gamma^k_{ij} V^j with V = d_t / sqrt(g_tt);
    coefficient derivatives by y-scaled central differences.
    """
    f = fiber_scale_many(spec, q)
    vk = np.zeros(q.shape[:-1] + (3,))
    vk[..., 2] = 1.0 / f
    dV = np.zeros(q.shape[:-1] + (3, 3))  # dV[..., i, k] = d_i V^k
    h = 1e-6 * q[..., 1]
    for m in range(3):
        shift = np.zeros_like(q)
        shift[..., m] = h
        fm = (1.0 / fiber_scale_many(spec, q + shift)
              - 1.0 / fiber_scale_many(spec, q - shift)) / (2.0 * h)
        dV[..., m, 2] = fm
    gam = christoffel_many(spec, q)
    nab = dV + np.einsum("...kij,...j->...ik", gam, vk)
    g = metric_many(spec, q)
    ginv = np.linalg.inv(g)
    return np.einsum("...ij,...kl,...ik,...jl->...", ginv, g, nab, nab)


def curvature_deviation(spec: MetricSpec, box, n: int, seed: int) -> DeviationEstimate:
    """Monte Carlo integral of |R_V|^2 + |nabla V|^2 over a chart box.

    box is ((x0, x1), (y0, y1), (t0, t1)); sampling is uniform in
    coordinates and reweighted by the Riemannian volume density.
    """
    if n < 100:
        raise DomainError(f"need at least 100 samples, got {n}")
    (x0, x1), (y0, y1), (t0, t1) = box
    if y0 <= 0.0:
        raise DomainError("box intersects y <= 0")
    if not (x1 > x0 and y1 > y0 and t1 > t0):
        raise DomainError("box must have positive extent in every coordinate")
    rng = np.random.default_rng(seed)
    q = np.column_stack([
        rng.uniform(x0, x1, n), rng.uniform(y0, y1, n), rng.uniform(t0, t1, n)
    ])
    rv = r_v_operator_many(spec, q)
    rv2 = np.einsum("bij,bij->b", rv, rv)
    integrand = (rv2 + _vertical_gradient_sq(spec, q)) * volume_density_many(spec, q)
    coord_vol = (x1 - x0) * (y1 - y0) * (t1 - t0)
    est = coord_vol * float(np.mean(integrand))
    se = coord_vol * float(np.std(integrand, ddof=1) / math.sqrt(n))
    return DeviationEstimate(estimate=est, std_error=se, n_samples=n)


def moduli_dimension(genus: int) -> int:
    """6 g - 6 Teichmueller dimensions plus one fiber length."""
    if genus < 2:
        raise DomainError(
            f"genus {genus}: theorem hypothesis chi < 0 violated"
        )
    return 6 * genus - 6 + 1
