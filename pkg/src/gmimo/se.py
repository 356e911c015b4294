"""Variational state evolution: LMMSE MSE map, extrinsic SINR map, trajectories.

Everything here consumes only the singular spectrum (right-unitary invariance),
never dense matrices.  Conventions:

* gamma_hat(v) = (1/n) tr{[snr A^H A + (1/v) I]^{-1}}, strictly increasing in v.
* eta(v) = 1/v - 1/gamma_hat^{-1}(v), the extrinsic SINR the linear stage
  delivers when the denoiser's posterior variance is v.
* Flat spectra (all singular values equal, m = n) make eta constant: eta == snr
  for every v.  Its inverse is then a wall at rho = snr; eta_se_inv returns
  +inf below the wall (the constraint is inactive there) and 0 at rho = snr.
* Trajectories start from the cold-start linear stage acting on prior variance
  one, rho_1 = 1/gamma_hat(1) - 1, which is what the receivers themselves do on
  their first pass.  Per-iteration trajectory values are only a fixed-point
  finding device, not an MSE prediction for the memory receiver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SingularSpectrum
from .curves import TransferCurve

__all__ = [
    "VseModel",
    "FixedPoint",
    "gamma_hat_se",
    "gamma_hat_se_inv",
    "eta_se",
    "eta_se_inv",
    "eta_se_inv_curve",
    "vse_trajectory",
    "find_crossing",
]

_FLAT_TOL = 1e-12


@dataclass(frozen=True)
class VseModel:
    spectrum: SingularSpectrum
    snr: float

    def __post_init__(self):
        if self.snr <= 0:
            raise ValueError("snr must be positive")

    @property
    def rho_max(self) -> float:
        return self.snr

    @property
    def is_flat(self) -> bool:
        e = self.spectrum.values
        return (
            self.spectrum.m == self.spectrum.n
            and float(e.max() - e.min()) <= _FLAT_TOL * float(e.max())
        )

    @property
    def vhat_max(self) -> float:
        """Supremum of gamma_hat over v: the largest attainable posterior variance."""
        spec = self.spectrum
        if spec.n > spec.t:
            return np.inf  # zero modes keep the prior variance
        e2 = spec.values**2
        return float(np.sum(1.0 / (self.snr * e2)) / spec.n)


@dataclass(frozen=True)
class FixedPoint:
    rho_star: float
    v_star: float


def gamma_hat_se(v: float, model: VseModel) -> float:
    """Posterior variance of the LMMSE stage for prior variance v."""
    if v <= 0:
        raise ValueError("prior variance must be positive")
    spec = model.spectrum
    e2 = spec.values**2
    s = np.sum(1.0 / (model.snr * e2 + 1.0 / v)) + (spec.n - spec.t) * v
    return float(s / spec.n)


def _gamma_hat_deriv(v: float, model: VseModel) -> float:
    spec = model.spectrum
    e2 = spec.values**2
    s = np.sum((1.0 / v**2) / (model.snr * e2 + 1.0 / v) ** 2) + (spec.n - spec.t)
    return float(s / spec.n)


def gamma_hat_se_inv(vhat: float, model: VseModel, rtol: float = 1e-13) -> float:
    """Inverse of gamma_hat: bracketed monotone solve (Newton inside bisection)."""
    vmax = model.vhat_max
    if not 0 < vhat < vmax:
        raise ValueError(f"vhat={vhat} outside attainable range (0, {vmax})")
    lo = vhat  # gamma_hat(v) <= v
    hi = max(2 * vhat, 1.0)
    while gamma_hat_se(hi, model) < vhat:
        hi *= 4.0
        if hi > 1e30:
            raise ValueError(f"vhat={vhat} not attained below v=1e30")
    while gamma_hat_se(lo, model) > vhat:
        lo *= 0.25
    v = min(max(2 * vhat, lo), hi)
    for _ in range(200):
        g = gamma_hat_se(v, model) - vhat
        if g > 0:
            hi = v
        else:
            lo = v
        step = g / _gamma_hat_deriv(v, model)
        v_new = v - step
        if not lo < v_new < hi:  # Newton left the bracket: bisect
            v_new = 0.5 * (lo + hi)
        if abs(v_new - v) <= rtol * v_new or hi - lo <= rtol * lo:
            return v_new
        v = v_new
    return v


def _gap(u: float, model: VseModel) -> float:
    """u - gamma_hat(u), evaluated without cancellation."""
    spec = model.spectrum
    se2 = model.snr * spec.values**2
    return float(np.sum(u * u * se2 / (1.0 + u * se2)) / spec.n)


def eta_se(v: float, model: VseModel) -> float:
    """Extrinsic SINR map 1/v - 1/gamma_hat^{-1}(v); constant (= snr) on flat spectra.

    Evaluated as (u - v)/(u v) with u - v computed in closed form, which stays
    accurate down to v -> 0 where the naive difference of reciprocals cancels.
    """
    if model.is_flat:
        # closed form: gamma_hat(u) = 1/(snr + 1/u), so the map cancels to snr
        return model.snr
    u = gamma_hat_se_inv(v, model)
    return _gap(u, model) / (u * v)


def _eta_extended(v: float, model: VseModel) -> float:
    """eta extended by the cold-start extrinsic map where the inverse is undefined."""
    if model.is_flat:
        return model.snr
    if v < model.vhat_max:
        return eta_se(v, model)
    return max(_gap(v, model) / (v * gamma_hat_se(v, model)), 0.0)


def eta_se_inv(rho: float, model: VseModel) -> float:
    """Decoder-variance level at which the linear stage delivers SINR rho.

    Monotone nonincreasing in rho.  Conventions: on flat spectra the curve is a
    wall at rho = snr (+inf below, 0 at the wall); where rho falls below the
    infimum of eta's range the boundary value is returned.
    """
    if not 0 < rho <= model.rho_max:
        raise ValueError(f"rho={rho} outside (0, {model.rho_max}]")
    if model.is_flat:
        return 0.0 if rho >= model.snr else np.inf
    lo, hi = 1e-18, 1.0
    if eta_se(lo, model) <= rho:  # rho at/above attainable SINR: v -> 0
        return 0.0
    vmax = model.vhat_max
    cap = 1e18 if np.isinf(vmax) else vmax * (1 - 1e-12)
    while hi < cap and eta_se(min(hi, cap), model) > rho:
        hi = min(hi * 2, cap)
        if hi == cap:
            break
    if eta_se(hi, model) > rho:
        return hi  # boundary extension: eta never drops to rho
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if eta_se(mid, model) > rho:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    return 0.5 * (lo + hi)


def eta_samples(model: VseModel, num: int = 20000):
    """Cached vectorized (v, eta(v)) table, parameterized by the prior variance u.

    Built without root-finding: on a u-grid, v = gamma_hat(u) and
    eta = (u - v)/(u v) with the closed-form gap.  v ascends, eta descends.
    """
    tab = getattr(model, "_eta_tab", None)
    if tab is not None and tab[0].size == num:
        return tab
    spec = model.spectrum
    se2 = model.snr * spec.values[None, :] ** 2
    u = np.geomspace(1e-14, 1e14, num)[:, None]
    gap = np.sum(u * u * se2 / (1.0 + u * se2), axis=1) / spec.n
    v = np.sum(1.0 / (se2 + 1.0 / u), axis=1) + (spec.n - spec.t) * u[:, 0]
    v /= spec.n
    eta = gap / (u[:, 0] * v)
    keep = np.concatenate([[True], np.diff(v) > 0]) & (eta > 0)
    tab = (v[keep], eta[keep])
    object.__setattr__(model, "_eta_tab", tab)
    return tab


def eta_se_inv_fast(rho, model: VseModel):
    """Table-interpolated eta^{-1} (boundary-clamped); fine for integration."""
    if model.is_flat:
        rho_arr = np.asarray(rho, dtype=float)
        out = np.where(rho_arr >= model.snr, 0.0, np.inf)
        return float(out) if np.isscalar(rho) else out
    v, eta = eta_samples(model)
    out = np.interp(np.asarray(rho, dtype=float), eta[::-1], v[::-1])
    return float(out) if np.isscalar(rho) else out


def eta_se_inv_curve(model: VseModel, rho_grid: np.ndarray) -> TransferCurve:
    """Sampled eta^{-1} on a grid (flat-spectrum walls become large finite caps)."""
    rho_grid = np.asarray(rho_grid, dtype=float)
    vals = np.array([eta_se_inv(r, model) for r in rho_grid])
    vals = np.where(np.isinf(vals), 1e30, vals)
    return TransferCurve(rho_grid, vals, "decreasing")


def vse_trajectory(
    model: VseModel,
    denoiser_curve,
    max_iters: int = 2000,
    tol: float = 1e-12,
):
    """Alternate the SINR map and a denoiser curve from a cold start.

    `denoiser_curve` is a TransferCurve (rho -> mmse) or any callable.  Returns
    (trajectory, FixedPoint) where trajectory is a list of (rho_t, v_t).
    """
    phi = denoiser_curve if callable(denoiser_curve) else denoiser_curve.__call__
    rho = max(1.0 / gamma_hat_se(1.0, model) - 1.0, 1e-300)
    traj = []
    v_prev = np.inf
    for _ in range(max_iters):
        v = float(phi(rho))
        traj.append((float(rho), v))
        if v <= 1e-15:  # absorbing error-free state
            v = 0.0
            traj[-1] = (float(rho), 0.0)
            break
        rho = _eta_extended(v, model)
        if abs(v - v_prev) < tol * max(v, 1e-30):
            break
        v_prev = v
    rho_star, v_star = traj[-1]
    return traj, FixedPoint(rho_star, v_star)


def find_crossing(model: VseModel, denoiser_curve, v_floor: float = 1e-13) -> FixedPoint:
    """Crossing of the denoiser curve with eta^{-1} reached from a cold start.

    Solved in v-space as the largest root of phi(eta(v)) = v below the
    cold-start level: that root is the fixed point the (monotone) alternating
    dynamics converge to.  Falls back to the wall when no root exists
    (error-free operation up to rho_max).
    """
    from scipy.optimize import brentq

    phi = denoiser_curve if callable(denoiser_curve) else denoiser_curve.__call__

    def h(v):
        return float(phi(_eta_extended(v, model))) - v

    v_start = float(phi(max(1.0 / gamma_hat_se(1.0, model) - 1.0, 1e-300)))
    if model.is_flat:
        # eta is constant: one NLD pass lands exactly on the fixed point
        return FixedPoint(model.snr, float(phi(model.snr)))
    grid = np.geomspace(v_floor, v_start, 600)[::-1]  # scan downward from cold start
    prev = grid[0]
    h_prev = h(prev)
    if h_prev >= 0:
        # already at/above the curve: fixed point at the cold-start level
        return FixedPoint(_eta_extended(prev, model), prev)
    for v in grid[1:]:
        hv = h(v)
        if hv >= 0:
            v_star = brentq(h, v, prev, xtol=1e-16, rtol=1e-14)
            return FixedPoint(_eta_extended(v_star, model), v_star)
        prev, h_prev = v, hv
    # no root above the floor: error-free down to the wall
    return FixedPoint(float(model.rho_max), float(phi(model.rho_max)))
