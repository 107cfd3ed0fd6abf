"""Drinfeld-module arithmetic over F_q(t) and coset structure of orbit intersections."""

__version__ = "0.1.0"
