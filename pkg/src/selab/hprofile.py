"""Flat-start growth profile h with h'' = g(h), h(0) = h'(0) = 0.

The profile exists exactly when g is integrable at 0 (otherwise no orbit
leaves the origin; construction refuses with a KellerOssermanError).
First integral: multiplying by h' gives

    (h')^2(t) = 2 G(h(t)),  G(y) = integral_0^y g,

so t(h) = integral_0^h dy / sqrt(2 G(y)) and the profile is recovered by
inverting this strictly increasing map.  For the power family
g(s) = s^-alpha (alpha < 1) everything is closed form:

    h(t) = C t^(2/(alpha+1)),
    C = ((alpha+1)/2 * sqrt(2/(1-alpha)))^(2/(alpha+1)),

e.g. alpha = 1/2: h(t) = (1.5 t)^(4/3), so h(2/3) = 1 and h'(2/3) = 2.
Two consequences used downstream: the energy identity above, and the
bound t h'(t) <= 2 h(t) (h' is nondecreasing, so h(t) >= t h'(t)/2 by
convexity through the origin; for the power family the ratio
t h' / (2h) is constant and equals 1/(alpha+1)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import PchipInterpolator

from .errors import KellerOssermanError, ModelError
from .model import classify_singularity


@dataclass
class HProfile:
    """Monotone table (t_i, h_i, h'_i) on [0, T] plus tabulated G.

    For the power family the exact closed forms back the evaluators and
    the table is a sampling of them; otherwise monotone (PCHIP)
    interpolation of the table is used.
    """

    t: np.ndarray
    h: np.ndarray
    dh: np.ndarray
    T: float
    G_y: np.ndarray
    G_val: np.ndarray
    coeff: float | None = None      # closed-form C, power family only
    exponent: float | None = None   # closed-form 2/(alpha+1)
    alpha: float | None = None      # power-family alpha, for exact G

    def __post_init__(self):
        self._h_interp = None
        self._dh_interp = None
        self._G_interp = None

    @property
    def closed_form(self):
        return self.coeff is not None

    def h_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.closed_form:
            return self.coeff * t**self.exponent
        if self._h_interp is None:
            self._h_interp = PchipInterpolator(self.t, self.h)
        return self._h_interp(np.clip(t, 0.0, self.T))

    def dh_at(self, t):
        t = np.asarray(t, dtype=float)
        if self.closed_form:
            with np.errstate(divide="ignore"):
                out = self.coeff * self.exponent * t ** (self.exponent - 1.0)
            return np.where(t == 0.0, 0.0, out)
        if self._dh_interp is None:
            self._dh_interp = PchipInterpolator(self.t, self.dh)
        return self._dh_interp(np.clip(t, 0.0, self.T))

    def G_at(self, y):
        y = np.asarray(y, dtype=float)
        if self.alpha is not None:
            return y ** (1.0 - self.alpha) / (1.0 - self.alpha)
        if self._G_interp is None:
            self._G_interp = PchipInterpolator(self.G_y, self.G_val)
        return self._G_interp(np.clip(y, self.G_y[0], self.G_y[-1]))


def _t_grid(T, n_uniform=160, n_geometric=48):
    """[0, T] with geometric refinement near 0 (profile has a power cusp)."""
    geo = T * np.geomspace(1e-10, 0.1, n_geometric)
    uni = np.linspace(0.1 * T, T, n_uniform)
    return np.concatenate([[0.0], geo, uni[1:]])


def build_h_profile(g, T=1.0, tol=1e-10):
    """Construct the profile on [0, T].

    Power-family g uses the closed form; tabulated g goes through
    quadrature of t(h) = integral dy/sqrt(2 G(y)) and monotone inversion.
    Raises KellerOssermanError for non-integrable g and ModelError for
    T <= 0 (or an indeterminate table classification).
    """
    if T <= 0:
        raise ModelError(f"profile domain cap T must be positive, got {T}")
    verdict = classify_singularity(g)
    if verdict == "non-integrable":
        raise KellerOssermanError(
            "g is non-integrable at 0: no flat-start profile h'' = g(h) exists"
        )
    if verdict == "indeterminate":
        raise ModelError("cannot classify g at 0; profile construction refused")

    t = _t_grid(T)
    if g.family == "power":
        alpha = g.alpha
        expo = 2.0 / (alpha + 1.0)
        coeff = ((alpha + 1.0) / 2.0 * np.sqrt(2.0 / (1.0 - alpha))) ** expo
        h = coeff * t**expo
        with np.errstate(divide="ignore"):
            dh = coeff * expo * t ** (expo - 1.0)
        dh[0] = 0.0
        y = np.concatenate([[0.0], np.geomspace(max(h[1], 1e-300), h[-1], 400)])
        G = y ** (1.0 - alpha) / (1.0 - alpha)
        return HProfile(t=t, h=h, dh=dh, T=float(T), G_y=y, G_val=G,
                        coeff=float(coeff), exponent=float(expo), alpha=float(alpha))

    # tabulated g: cumulative quadrature for G and t(h), then invert.
    # Both integrands are integrable power-like singularities at 0, so a
    # geometric grid with an analytic local-power first cell suffices.
    hi = 1.0
    for _ in range(60):
        y = np.concatenate([[0.0], np.geomspace(1e-12 * hi, hi, 3000)])
        gy = g(np.maximum(y, y[1]))
        G = cumulative_trapezoid(gy, y, initial=0.0)
        with np.errstate(divide="ignore"):
            w = 1.0 / np.sqrt(2.0 * G[1:])
        # local power G ~ G_1 (y/y_1)^m on the first cell, m < 2
        m = np.log(G[2] / G[1]) / np.log(y[2] / y[1])
        t0 = y[1] * w[0] / (1.0 - m / 2.0)
        ty = np.concatenate(
            [[0.0], t0 + cumulative_trapezoid(w, y[1:], initial=0.0)]
        )
        if ty[-1] >= T:
            break
        hi *= 4.0
    else:
        raise ModelError("profile height escaped; g decays too fast")
    inv = PchipInterpolator(ty, y)
    h = inv(np.clip(t, 0.0, ty[-1]))
    dh = np.sqrt(2.0 * np.interp(h, y, G))
    dh[0] = 0.0
    return HProfile(t=t, h=h, dh=dh, T=float(T), G_y=y, G_val=G)


@dataclass
class HBoundReport:
    """Result of checking t h'(t) <= 2 h(t) over the table."""

    max_ratio: float
    argmax_t: float
    passed: bool
    tol: float


def verify_h_bound(profile, tol=1e-9):
    """Check the growth bound t h'(t) <= 2 h(t) at every table point.

    The ratio t h' / (2 h) is reported; for power-family profiles it is
    identically 1/(alpha+1) < 1.  An empty or single-point table passes
    vacuously.
    """
    mask = profile.t > 0
    if not np.any(mask):
        return HBoundReport(max_ratio=0.0, argmax_t=0.0, passed=True, tol=tol)
    t = profile.t[mask]
    h = profile.h[mask]
    dh = profile.dh[mask]
    ratio = t * dh / (2.0 * h)
    k = int(np.argmax(ratio))
    return HBoundReport(
        max_ratio=float(ratio[k]),
        argmax_t=float(t[k]),
        passed=bool(ratio[k] <= 1.0 + tol),
        tol=tol,
    )
