"""Iterative receivers and information-theoretic tools for coded generalized MIMO.

Subpackages/modules:
    channel -- right-unitarily-invariant channel generation and spectra
    modem   -- constellations, scalar AWGN posteriors, MMSE transfer curves
    ldpc    -- LDPC construction, BP decoding, transfer measurement, code design
    detect  -- memory-AMP, OAMP/VAMP and cascaded receivers
    se      -- variational state evolution and fixed points
    rates   -- I-MMSE achievable rates and SNR limits
    bench   -- config-driven experiment runner (BER / rate / SE / runtime)
"""

from . import channel, curves, detect, ldpc, modem, rates, se

__version__ = "0.1.0"

__all__ = ["channel", "curves", "detect", "ldpc", "modem", "rates", "se", "__version__"]
