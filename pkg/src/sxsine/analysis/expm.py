"""Exact discretization of s' = M s + b via an augmented matrix exponential."""

from __future__ import annotations

import math

import numpy as np

from ..errors import StepTooLargeError
from .dynamics import AffineSystem

MAX_SCALED_NORM = 16.0
_TAYLOR_ORDER = 18


def expm_taylor(A: np.ndarray) -> np.ndarray:
    """exp(A) by scaling and squaring with a truncated Taylor series.

    A is scaled by 2**-s until its infinity norm is at most 1/2; the degree-18
    remainder at that norm is below 1e-24, far under double rounding.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    norm = np.linalg.norm(A, np.inf)
    s = 0 if norm <= 0.5 else int(math.ceil(math.log2(norm / 0.5)))
    X = A / (2.0 ** s)
    eye = np.eye(n)
    E = eye.copy()
    for k in range(_TAYLOR_ORDER, 0, -1):
        E = eye + (X @ E) / k
    for _ in range(s):
        E = E @ E
    return E


def augmented(sys: AffineSystem) -> np.ndarray:
    """[[M, b], [0, 0]]; its exponential carries both Phi and psi."""
    n = sys.M.shape[0]
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = sys.M
    A[:n, n] = sys.b
    return A


def step_map(sys: AffineSystem, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """(Phi, psi) with s(t + delta) = Phi s(t) + psi.

    Phi = exp(M delta), psi = int_0^delta exp(M tau) d tau  b.
    """
    if not delta > 0:
        raise ValueError("delta must be > 0")
    scaled = np.linalg.norm(sys.M, np.inf) * delta
    if scaled > MAX_SCALED_NORM:
        raise StepTooLargeError(
            f"||M delta||_inf = {scaled:.6g} exceeds {MAX_SCALED_NORM}; shrink the step")
    n = sys.M.shape[0]
    E = expm_taylor(augmented(sys) * delta)
    return E[:n, :n].copy(), E[:n, n].copy()


def affine_power(phi: np.ndarray, psi: np.ndarray, k: int,
                 squares: list | None = None) -> tuple[np.ndarray, np.ndarray]:
    """k-fold composition of s -> phi s + psi, by binary exponentiation.

    ``squares`` caches the 2**j-fold maps between calls; results depend only on k.
    """
    n = phi.shape[0]
    if squares is None:
        squares = []
    if not squares:
        E = np.eye(n + 1)
        E[:n, :n] = phi
        E[:n, n] = psi
        squares.append(E)
    R = np.eye(n + 1)
    j = 0
    while k:
        while len(squares) <= j:
            squares.append(squares[-1] @ squares[-1])
        if k & 1:
            R = squares[j] @ R
        k >>= 1
        j += 1
    return R[:n, :n], R[:n, n]
