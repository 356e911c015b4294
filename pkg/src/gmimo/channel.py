"""Right-unitarily-invariant channel matrices with controlled singular spectra.

All detection-independent analysis (state evolution, achievable rates) consumes
only the `SingularSpectrum`; dense factors exist solely for Monte Carlo runs.
Normalization convention throughout: sum of squared singular values equals the
transmit dimension n, i.e. tr{A^H A} = n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularSpectrum",
    "ChannelMatrix",
    "SpectralMoments",
    "gen_iid_gaussian",
    "gen_ill_conditioned",
    "spectral_moments",
    "save_spectrum",
    "load_spectrum",
]


@dataclass(frozen=True)
class SingularSpectrum:
    """Singular values of an m x n channel, descending, with sum e_i^2 = n."""

    m: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        t = min(self.m, self.n)
        if self.m < 1 or self.n < 1:
            raise ValueError("dimensions must be positive")
        if v.shape != (t,):
            raise ValueError(f"expected {t} singular values, got {v.shape}")
        if np.any(v < 0):
            raise ValueError("singular values must be nonnegative")
        if np.any(np.diff(v) > 0):
            raise ValueError("singular values must be descending")
        norm = np.sum(v**2)
        if abs(norm / self.n - 1.0) > 1e-9:
            raise ValueError(f"sum of squared singular values is {norm}, expected {self.n}")
        object.__setattr__(self, "values", v)

    @property
    def beta(self) -> float:
        """Channel load n/m."""
        return self.n / self.m

    @property
    def t(self) -> int:
        return min(self.m, self.n)

    def gram_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of A A^H: squared singular values zero-padded to length m."""
        lam = np.zeros(self.m)
        lam[: self.t] = self.values**2
        return lam


@dataclass(frozen=True)
class ChannelMatrix:
    """Factored realization A = U diag(e) V^H with unitary U (m x m), V (n x n)."""

    u: np.ndarray
    v: np.ndarray
    spectrum: SingularSpectrum

    def __post_init__(self):
        m, n = self.spectrum.m, self.spectrum.n
        if self.u.shape != (m, m) or self.v.shape != (n, n):
            raise ValueError("factor shapes inconsistent with spectrum dims")
        for q, dim in ((self.u, m), (self.v, n)):
            dev = np.max(np.abs(q.conj().T @ q - np.eye(dim)))
            if dev > 1e-9:
                raise ValueError(f"factor not unitary (max deviation {dev:.2e})")

    @property
    def m(self) -> int:
        return self.spectrum.m

    @property
    def n(self) -> int:
        return self.spectrum.n

    def dense(self) -> np.ndarray:
        """Assembled dense matrix (cached after first call)."""
        a = getattr(self, "_dense", None)
        if a is None:
            m, n, t = self.m, self.n, self.spectrum.t
            lam = np.zeros((m, n))
            lam[np.arange(t), np.arange(t)] = self.spectrum.values
            a = self.u @ lam @ self.v.conj().T
            object.__setattr__(self, "_dense", a)
        return a

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.dense() @ x

    def rmatvec(self, y: np.ndarray) -> np.ndarray:
        return self.dense().conj().T @ y


@dataclass(frozen=True)
class SpectralMoments:
    """Extreme eigenvalues of A A^H and trace moments of B = lambda_dagger*I - A A^H."""

    lambda_min: float
    lambda_max: float
    lambda_dagger: float
    b: np.ndarray  # b[k] = (1/m) tr{B^k}, k = 0..horizon

    def __post_init__(self):
        if self.lambda_dagger != (self.lambda_min + self.lambda_max) / 2:
            raise ValueError("lambda_dagger must equal the midpoint of the extremes")
        if abs(self.b[0] - 1.0) > 1e-12:
            raise ValueError("b_0 must be 1")
        half = (self.lambda_max - self.lambda_min) / 2
        bound = half ** np.arange(len(self.b)) + 1e-12
        if np.any(np.abs(self.b) > bound):
            raise ValueError("moment bound |b_k| <= ((l_max-l_min)/2)^k violated")


def spectral_moments(spectrum: SingularSpectrum, horizon: int) -> SpectralMoments:
    """Trace moments b_k = (1/m) tr{B^k} for k = 0..horizon, exact from eigenvalues."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    lam = spectrum.gram_eigenvalues()
    lmin, lmax = float(lam.min()), float(lam.max())
    ldag = (lmin + lmax) / 2
    d = ldag - lam
    ks = np.arange(horizon + 1)
    b = np.mean(d[None, :] ** ks[:, None], axis=1)
    return SpectralMoments(lmin, lmax, ldag, b)


def _haar_factors(m: int, n: int, rng: np.random.Generator):
    """Unitary factors from the SVD of a fresh IID complex Gaussian matrix."""
    g = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)
    u, _, vh = np.linalg.svd(g, full_matrices=True)
    return u, vh.conj().T


def gen_iid_gaussian(m: int, n: int, seed) -> ChannelMatrix:
    """IID complex Gaussian entries, rescaled so tr{A^H A} = n exactly."""
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    rng = np.random.default_rng(seed)
    g = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2)
    u, s, vh = np.linalg.svd(g, full_matrices=True)
    s = s * np.sqrt(n / np.sum(s**2))
    spec = SingularSpectrum(m, n, s)
    return ChannelMatrix(u, vh.conj().T, spec)


def gen_ill_conditioned(m: int, n: int, kappa: float, seed) -> ChannelMatrix:
    """Geometric singular-value ladder e_i/e_{i+1} = kappa^(1/T), unit-trace scaled.

    The ladder ratio is applied literally for i = 1..T-1, so the extreme ratio is
    e_1/e_T = kappa^((T-1)/T).  U and V come from the SVD of a fresh IID Gaussian
    draw, making the ensemble right-unitarily invariant.
    """
    if m < 1 or n < 1:
        raise ValueError("dimensions must be positive")
    if kappa < 1:
        raise ValueError(f"kappa must be >= 1, got {kappa}")
    rng = np.random.default_rng(seed)
    t = min(m, n)
    q = float(kappa) ** (-1.0 / t)
    e = q ** np.arange(t)
    e *= np.sqrt(n / np.sum(e**2))
    u, v = _haar_factors(m, n, rng)
    return ChannelMatrix(u, v, SingularSpectrum(m, n, e))


def save_spectrum(spectrum: SingularSpectrum, path) -> None:
    """Flat text export: first line "m n", second line the singular values."""
    with open(path, "w") as fh:
        fh.write(f"{spectrum.m} {spectrum.n}\n")
        fh.write(" ".join(repr(float(v)) for v in spectrum.values) + "\n")


def load_spectrum(path) -> SingularSpectrum:
    with open(path) as fh:
        m, n = (int(tok) for tok in fh.readline().split())
        values = np.array([float(tok) for tok in fh.readline().split()])
    return SingularSpectrum(m, n, values)
