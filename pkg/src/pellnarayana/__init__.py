"""Certified replay of the solution of P_n^(k) = N_m (k-Pell vs Narayana's cows)."""

__version__ = "0.1.0"
