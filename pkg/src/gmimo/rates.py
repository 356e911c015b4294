"""Achievable rates from MMSE transfer curves via the mutual-information integral.

Rates are integrals of mmse-vs-SINR curves in nats, converted to bits once at
the end, reported per transmit symbol (per complex dimension).  The capped
linear-stage curve eta^{-1} bounds every integrand; with a Gaussian input the
full integral reproduces the log-det capacity, which is the main sanity anchor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import SingularSpectrum
from .curves import TransferCurve
from .modem import Constellation, mmse_curve
from .se import VseModel, eta_se_inv_fast, find_crossing

__all__ = [
    "RateResult",
    "RateConstraintError",
    "achievable_rate",
    "max_rate",
    "cas_rate",
    "snr_limit_for_rate",
    "logdet_capacity_bits",
]

_LN2 = np.log(2.0)


class RateConstraintError(ValueError):
    """A code transfer curve pokes above the admissible ceiling."""

    def __init__(self, rho: float, value: float, ceiling: float):
        self.rho = rho
        super().__init__(
            f"code curve violates the ceiling at rho={rho:g}: {value:g} >= {ceiling:g}"
        )


@dataclass(frozen=True)
class RateResult:
    rate_bits: float
    integrand_samples: TransferCurve
    rho_upper: float

    def __post_init__(self):
        if self.rate_bits < -1e-12:
            raise ValueError("negative rate")


def _phi_s(c: Constellation, rho_max: float):
    """Array-callable constellation mmse function, cheap for gaussian."""
    if c.kind == "gaussian":
        return lambda rho: 1.0 / (1.0 + np.asarray(rho, dtype=float))
    grid = np.concatenate([[0.0], np.geomspace(1e-6, rho_max, 800)])
    base = mmse_curve(c, np.maximum(grid, 1e-12))
    return lambda rho: np.interp(rho, grid, base.y)


def achievable_rate(
    curve_c: TransferCurve,
    target: TransferCurve | None = None,
    zero_level: float = 1e-9,
) -> RateResult:
    """Integral of a decoder transfer curve up to its error-free SINR.

    The upper limit is the first grid crossing of `zero_level` (the curve's end
    if it never reaches it).  When `target` is given, the curve must stay
    strictly below it on the shared range.
    """
    if curve_c.direction != "decreasing":
        raise ValueError("decoder curve must be decreasing")
    if target is not None:
        hi = min(curve_c.x[-1], target.x[-1])
        mask = curve_c.x <= hi
        ceil = target(curve_c.x[mask])
        bad = np.nonzero(curve_c.y[mask] >= ceil)[0]
        if bad.size:
            i = bad[0]
            raise RateConstraintError(
                float(curve_c.x[mask][i]), float(curve_c.y[mask][i]), float(ceil[i])
            )
    y = curve_c.y
    if y.min() <= zero_level:
        rho_c = curve_c.inverse(zero_level)
    else:
        rho_c = float(curve_c.x[-1])
    xs = curve_c.x[curve_c.x < rho_c]
    ys = curve_c.y[curve_c.x < rho_c]
    if xs.size == 0 or xs[0] > 0.0:
        xs = np.concatenate([[0.0], xs])  # clamped extension to rho = 0
        ys = np.concatenate([[y[0]], ys])
    xs = np.concatenate([xs, [rho_c]])
    ys = np.concatenate([ys, [float(curve_c(rho_c))]])
    nats = float(np.trapezoid(ys, xs))
    return RateResult(nats / _LN2, TransferCurve(xs[1:], ys[1:], "decreasing"), rho_c)


def _min_vals(model: VseModel, phi, grid: np.ndarray) -> np.ndarray:
    """min{phi, eta^{-1}} evaluated on an ascending positive grid."""
    p = np.asarray(phi(grid), dtype=float)
    if model.is_flat:
        # the eta wall sits at rho = snr; below it the constraint is inactive
        return np.where(grid <= model.snr, p, 0.0)
    return np.minimum(p, eta_se_inv_fast(grid, model))


def _integrate_min(model: VseModel, phi, rho_hi: float, density: int = 1) -> float:
    """Integral of min{phi, eta^{-1}} over [0, rho_hi] in nats.

    Trapezoid on a log-spaced grid with the min{} crossover inserted exactly,
    plus the clamped strip down to rho = 0.
    """
    if rho_hi <= 0:
        return 0.0
    fp = find_crossing(model, phi)
    lo = min(1e-9 * rho_hi, 1e-9)
    grid = np.geomspace(lo, rho_hi, 6000 * density)
    if 0 < fp.rho_star < rho_hi:  # resolve the kink exactly
        grid = np.unique(np.concatenate([grid, [fp.rho_star]]))
    vals = _min_vals(model, phi, grid)
    total = float(np.trapezoid(vals, grid))
    total += grid[0] * float(phi(grid[0]))  # clamped strip down to rho = 0
    return total


def _sampled_integrand(model: VseModel, phi, rho_hi: float, num: int = 200) -> TransferCurve:
    grid = np.geomspace(min(1e-6, rho_hi * 1e-3), rho_hi, num)
    return TransferCurve(grid, _min_vals(model, phi, grid), "decreasing")


def max_rate(model: VseModel, c: Constellation) -> RateResult:
    """Rate of the fully coupled receiver: integral of min{phi_S, eta^{-1}} to snr."""
    phi = _phi_s(c, model.rho_max)
    nats = _integrate_min(model, phi, model.rho_max)
    samples = _sampled_integrand(model, phi, model.rho_max)
    return RateResult(nats / _LN2, samples, model.rho_max)


def cas_rate(model: VseModel, c: Constellation) -> RateResult:
    """Rate of the cascaded receiver: same integrand, stopped at the uncoded fixed point."""
    phi = _phi_s(c, model.rho_max)
    fp = find_crossing(model, phi)
    nats = _integrate_min(model, phi, fp.rho_star)
    samples = _sampled_integrand(model, phi, max(fp.rho_star, 1e-6))
    return RateResult(nats / _LN2, samples, fp.rho_star)


def logdet_capacity_bits(spectrum: SingularSpectrum, snr: float) -> float:
    """Gaussian-input capacity (1/n) sum log2(1 + snr e_i^2), per transmit symbol."""
    e2 = spectrum.values**2
    return float(np.sum(np.log2(1.0 + snr * e2)) / spectrum.n)


def snr_limit_for_rate(
    c: Constellation,
    spectrum: SingularSpectrum,
    target_rate: float,
    tol_db: float = 0.01,
    lo_db: float = -30.0,
    hi_db: float = 60.0,
) -> float:
    """SNR (dB) at which the coupled receiver's max rate equals `target_rate` bits."""
    if c.kind != "gaussian" and target_rate >= c.bits_per_symbol:
        raise ValueError(
            f"target {target_rate} bits unreachable for {c.kind} "
            f"(ceiling {c.bits_per_symbol} bits)"
        )

    def rate_at(db):
        return max_rate(VseModel(spectrum, 10 ** (db / 10)), c).rate_bits

    if rate_at(hi_db) < target_rate:
        raise ValueError(f"target {target_rate} bits unreachable below {hi_db} dB")
    if rate_at(lo_db) > target_rate:
        raise ValueError(f"target {target_rate} bits already exceeded at {lo_db} dB")
    lo, hi = lo_db, hi_db
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if rate_at(mid) < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
