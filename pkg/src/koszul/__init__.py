"""Koszul-complex division toolkit: exact algebra, inequality checks, weights and L² estimates."""

__version__ = "0.1.0"

from .exterior import KoszulElement, contract, norm_sq, pairing, wedge_conj  # noqa: E402
from .polyalg import GaussQ, HermitianPolynomial, Polynomial, parse_polynomial  # noqa: E402

__all__ = [
    "__version__",
    "GaussQ",
    "Polynomial",
    "HermitianPolynomial",
    "parse_polynomial",
    "KoszulElement",
    "contract",
    "wedge_conj",
    "norm_sq",
    "pairing",
]
