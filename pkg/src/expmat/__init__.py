"""Exponential matrices over F_p[T]: verification, canonical forms and
classification, with brute-force oracles for small cases."""

from .field import Fp, Prime, binom_mod_p, inv, sigma_p
from .poly import BiPoly, Poly, PPoly
from .polymat import PolyMatrix

__all__ = ["Fp", "Prime", "binom_mod_p", "inv", "sigma_p", "Poly", "PPoly", "BiPoly", "PolyMatrix"]
