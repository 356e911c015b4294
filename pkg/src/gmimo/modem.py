"""Constellations, Gray mapping, scalar AWGN posteriors and MMSE transfer curves.

Scalar observation convention: r = sqrt(rho) * x + z with z ~ CN(0, 1), so each
real dimension sees noise of variance 1/2.  Complex constellations are treated
per complex dimension; BPSK uses real signalling (+1/-1) under the same complex
noise, hence its posterior mean tanh(2*sqrt(rho)*Re r).

Gray tables (bit 0 maps to the positive extreme):
    BPSK   : 0 -> +1, 1 -> -1
    QPSK   : (b0, b1) -> ((1-2*b0) + 1j*(1-2*b1)) / sqrt(2)
    16-QAM : per axis, bit pair 00,01,11,10 -> +3,+1,-1,-3 (scaled 1/sqrt(10));
             symbol bits are (I pair, Q pair)
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import TransferCurve

__all__ = [
    "Constellation",
    "ScalarPosterior",
    "modulate",
    "posterior",
    "mmse_curve",
    "bit_llrs",
    "symbols_from_bit_llrs",
    "default_rho_grid",
]

_GH_ORDER = 64


def _gh_nodes(order: int = _GH_ORDER):
    # physicists' Gauss-Hermite: integral e^{-x^2} f(x) dx = sum w_i f(x_i);
    # matches a N(0, 1/2) expectation up to the 1/sqrt(pi) weight
    x, w = np.polynomial.hermite.hermgauss(order)
    return x, w / np.sqrt(np.pi)


@dataclass(frozen=True)
class ScalarPosterior:
    mean: np.ndarray
    var: np.ndarray


@dataclass(frozen=True)
class Constellation:
    """Discrete unit-power constellation, or the Gaussian-input surrogate.

    `points` are stored in label order: the integer formed by a symbol's bits
    (MSB first) indexes its point.  Empty for kind="gaussian".
    """

    kind: str
    points: np.ndarray
    bits_per_symbol: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        object.__setattr__(self, "points", pts)
        if self.kind == "gaussian":
            if pts.size:
                raise ValueError("gaussian kind carries no points")
            return
        if pts.size != 2**self.bits_per_symbol:
            raise ValueError("need 2**bits_per_symbol points")
        if len(np.unique(np.round(pts, 12))) != pts.size:
            raise ValueError("constellation points must be distinct")
        power = np.mean(np.abs(pts) ** 2)
        if abs(power - 1.0) > 1e-12:
            raise ValueError(f"constellation power {power} != 1")

    @property
    def size(self) -> int:
        return 0 if self.kind == "gaussian" else self.points.size

    @classmethod
    def named(cls, kind: str) -> "Constellation":
        kind = kind.lower()
        if kind == "gaussian":
            return cls("gaussian", np.array([], dtype=complex), 0)
        if kind == "bpsk":
            return cls("bpsk", np.array([1.0, -1.0], dtype=complex), 1)
        if kind == "qpsk":
            pts = np.array(
                [(1 - 2 * (i >> 1)) + 1j * (1 - 2 * (i & 1)) for i in range(4)]
            ) / np.sqrt(2)
            return cls("qpsk", pts, 2)
        if kind == "qam16":
            axis = np.array([3.0, 1.0, -3.0, -1.0]) / np.sqrt(10)  # label-indexed
            pts = np.array([axis[i >> 2] + 1j * axis[i & 3] for i in range(16)])
            return cls("qam16", pts, 4)
        raise ValueError(f"unknown constellation {kind!r}")

    @classmethod
    def from_points_file(cls, path) -> "Constellation":
        """Load "re im" lines; points are normalized to unit average power."""
        raw = np.loadtxt(path, ndmin=2)
        pts = raw[:, 0] + 1j * raw[:, 1]
        k = pts.size
        bits = int(np.log2(k))
        if 2**bits != k:
            raise ValueError("number of custom points must be a power of two")
        pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
        return cls("custom", pts, bits)


def modulate(bits: np.ndarray, c: Constellation) -> np.ndarray:
    """Map a bit vector to Gray-labelled symbols (label = bit group, MSB first)."""
    if c.kind == "gaussian":
        raise ValueError("gaussian kind has no bit mapping")
    bits = np.asarray(bits, dtype=np.int64).ravel()
    bps = c.bits_per_symbol
    if bits.size % bps:
        raise ValueError(f"bit count {bits.size} not divisible by {bps}")
    groups = bits.reshape(-1, bps)
    labels = groups @ (1 << np.arange(bps - 1, -1, -1))
    return c.points[labels]


def posterior(r, rho: float, c: Constellation) -> ScalarPosterior:
    """Exact Bayes posterior mean/variance of x given r = sqrt(rho) x + z."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    r = np.asarray(r, dtype=complex)
    if c.kind == "gaussian":
        mean = np.sqrt(rho) * r / (1 + rho)
        var = np.full(r.shape, 1.0 / (1 + rho))
        return ScalarPosterior(mean, var)
    pts = c.points
    # log-weights under CN(0,1) noise
    d2 = np.abs(r[..., None] - np.sqrt(rho) * pts) ** 2
    d2 -= d2.min(axis=-1, keepdims=True)
    w = np.exp(-d2)
    w /= w.sum(axis=-1, keepdims=True)
    mean = w @ pts
    second = w @ (np.abs(pts) ** 2)
    var = np.maximum(second - np.abs(mean) ** 2, 0.0)
    return ScalarPosterior(mean, var)


def default_rho_grid(snr: float, num: int = 200) -> np.ndarray:
    """Log-spaced SINR grid from 1e-4 up to snr."""
    return np.geomspace(1e-4, snr, num)


def _pam_axes(c: Constellation):
    """Per-axis PAM levels in label order for the separable built-in kinds."""
    if c.kind == "bpsk":
        return [np.array([1.0, -1.0])]
    if c.kind == "qpsk":
        s = 1 / np.sqrt(2)
        return [np.array([s, -s]), np.array([s, -s])]
    if c.kind == "qam16":
        axis = np.array([3.0, 1.0, -3.0, -1.0]) / np.sqrt(10)
        return [axis, axis]
    return None


def _pam_mmse(levels: np.ndarray, rhos: np.ndarray, order: int) -> np.ndarray:
    """MMSE of a uniform PAM level set under y = sqrt(rho)*s + N(0, 1/2), per rho."""
    xg, wg = _gh_nodes(order)
    sq = np.sqrt(np.asarray(rhos, dtype=float))[:, None, None]
    y = sq * levels[None, :, None] + xg[None, None, :]  # (rho, sent, node)
    d2 = (y[..., None] - sq[..., None] * levels) ** 2
    d2 -= d2.min(axis=-1, keepdims=True)
    w = np.exp(-d2)
    mean = (w @ levels) / w.sum(axis=-1)
    e_mean2 = (wg[None, None, :] * mean**2).sum(axis=2).mean(axis=1)
    return np.mean(levels**2) - e_mean2


def _complex_mmse(pts: np.ndarray, rho: float, order: int) -> float:
    """MMSE of a general complex point set under CN(0,1) noise (2-D quadrature)."""
    xg, wg = _gh_nodes(order)
    sq = np.sqrt(rho)
    z = xg[:, None] + 1j * xg[None, :]
    wz = wg[:, None] * wg[None, :]
    acc = 0.0
    for s in pts:
        y = sq * s + z
        d2 = np.abs(y[..., None] - sq * pts) ** 2
        d2 -= d2.min(axis=-1, keepdims=True)
        w = np.exp(-d2)
        mean = (w @ pts) / w.sum(axis=-1)
        acc += float(np.sum(wz * np.abs(mean) ** 2))
    e_mean2 = acc / len(pts)
    return float(np.mean(np.abs(pts) ** 2) - e_mean2)


def mmse_curve(c: Constellation, rho_grid: np.ndarray, order: int = _GH_ORDER) -> TransferCurve:
    """Scalar MMSE transfer function mmse{x | sqrt(rho) x + z} over the grid."""
    rho_grid = np.asarray(rho_grid, dtype=float)
    if np.any(rho_grid < 0) or np.any(np.diff(rho_grid) <= 0):
        raise ValueError("rho grid must be nonnegative ascending")
    if c.kind == "gaussian":
        y = 1.0 / (1.0 + rho_grid)
        return TransferCurve(rho_grid, y, "decreasing")
    axes = _pam_axes(c)
    if axes is not None:
        vals = np.sum([_pam_mmse(lv, rho_grid, order) for lv in axes], axis=0)
    else:
        vals = np.array([_complex_mmse(c.points, rho, order) for rho in rho_grid])
    vals = np.clip(vals, 1e-300, None)
    return TransferCurve(rho_grid, vals, "decreasing")


def bit_llrs(r: np.ndarray, noise_var: float, c: Constellation) -> np.ndarray:
    """Per-bit LLRs log P(b=0|r)/P(b=1|r) for r = x + g, g ~ CN(0, noise_var).

    Returns shape (len(r), bits_per_symbol), bit 0 first (MSB of the label).
    """
    r = np.asarray(r, dtype=complex).ravel()
    pts = c.points
    bps = c.bits_per_symbol
    d2 = -np.abs(r[:, None] - pts[None, :]) ** 2 / noise_var
    d2 -= d2.max(axis=1, keepdims=True)
    labels = np.arange(pts.size)
    out = np.empty((r.size, bps))
    for b in range(bps):
        mask0 = (labels >> (bps - 1 - b)) & 1 == 0
        l0 = np.log(np.exp(d2[:, mask0]).sum(axis=1))
        l1 = np.log(np.exp(d2[:, ~mask0]).sum(axis=1))
        out[:, b] = l0 - l1
    return out


def symbols_from_bit_llrs(llrs: np.ndarray, c: Constellation) -> ScalarPosterior:
    """Symbol posterior mean/var from per-bit LLRs (bits treated as independent)."""
    llrs = np.asarray(llrs, dtype=float)
    n, bps = llrs.shape
    if bps != c.bits_per_symbol:
        raise ValueError("LLR width mismatch")
    # p(bit=0) per position, then product over label bits for each point
    p0 = 1.0 / (1.0 + np.exp(-np.clip(llrs, -60, 60)))
    pts = c.points
    labels = np.arange(pts.size)
    logp = np.zeros((n, pts.size))
    for b in range(bps):
        bit = (labels >> (bps - 1 - b)) & 1
        pb = np.where(bit[None, :] == 0, p0[:, b : b + 1], 1 - p0[:, b : b + 1])
        logp += np.log(np.clip(pb, 1e-300, None))
    w = np.exp(logp - logp.max(axis=1, keepdims=True))
    w /= w.sum(axis=1, keepdims=True)
    mean = w @ pts
    second = w @ (np.abs(pts) ** 2)
    var = np.maximum(second - np.abs(mean) ** 2, 0.0)
    return ScalarPosterior(mean, var)
