"""Truncated multiplicative Toeplitz matrices with symbol coefficients n^(-sigma).

The N x N truncation T_N has entry (n, m) = (n/m)^(-sigma) when m | n and
0 otherwise.  Its Gram matrix T_N^T T_N collapses to a divisor sum,
entry (n, m) = n^s m^s [n,m]^(-2s) F(N/[n,m]) with the truncated power
sum F, which is what makes N = 2048 affordable.  Rescaled by rho N^(-rho)
(tau = 1 context, rho = 1 - 2 sigma) the squared singular values track the
eigenvalues of E(sigma, 1); the Hadamard factor G_N measures the finite-N
distortion and the Schatten diagnostics quantify its decay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import PowerSumTable, SpectralParams
from .errors import InvalidRegime
from .spectrum import entry_matrix

__all__ = [
    "ToeplitzTruncation",
    "GramMatrix",
    "HadamardFactor",
    "build_toeplitz",
    "gram_via_formula",
    "rescaled_singular_values",
    "hadamard_factor",
    "schatten_diff",
]


@dataclass(frozen=True)
class ToeplitzTruncation:
    n: int
    sigma: float
    values: np.ndarray


@dataclass(frozen=True)
class GramMatrix:
    n: int
    sigma: float
    values: np.ndarray


@dataclass(frozen=True)
class HadamardFactor:
    n: int
    m: int
    sigma: float
    values: np.ndarray


def build_toeplitz(N: int, sigma: float) -> ToeplitzTruncation:
    """T_N: entry (n, m) = (n/m)^(-sigma) when m divides n, else 0."""
    if N < 1:
        raise ValueError("N must be >= 1")
    T = np.zeros((N, N))
    for m in range(1, N + 1):
        mult = np.arange(m, N + 1, m)
        T[mult - 1, m - 1] = (mult / m) ** (-sigma)
    return ToeplitzTruncation(N, float(sigma), T)


def _lcm_grid(N: int, M: int | None = None) -> np.ndarray:
    n = np.arange(1, (M or N) + 1)
    g = np.gcd.outer(n, n)
    return (n[:, None] // g) * n[None, :]


def gram_via_formula(
    N: int, sigma: float, table: PowerSumTable | None = None
) -> GramMatrix:
    """T_N^T T_N assembled from the divisor-sum formula in O(N^2 log N).

    Entries with [n, m] > N vanish (the divisor sum is empty); the direct
    O(N^3) product is kept for oracle tests only.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if table is None:
        table = PowerSumTable(sigma, N)
    n = np.arange(1, N + 1, dtype=float)
    ell = _lcm_grid(N)
    counts = np.where(ell <= N, N // ell, 0)
    vals = (
        np.multiply.outer(n**sigma, n**sigma)
        * ell.astype(float) ** (-2.0 * sigma)
        * table.at_int(counts)
    )
    return GramMatrix(N, float(sigma), vals)


def rescaled_singular_values(N: int, sigma: float) -> np.ndarray:
    """rho N^(-rho) s_n^2 for the truncation, descending (rho = 1 - 2 sigma).

    These approach the eigenvalues of E(sigma, 1) as N grows, uniformly in
    the index.
    """
    if sigma >= 0.5:
        raise InvalidRegime("rescaling needs sigma < 1/2 so that rho = 1-2*sigma > 0")
    rho = 1.0 - 2.0 * sigma
    w = np.linalg.eigvalsh(gram_via_formula(N, sigma).values)[::-1]
    return rho * float(N) ** (-rho) * np.clip(w, 0.0, None)


def hadamard_factor(
    N: int, M: int, sigma: float, table: PowerSumTable | None = None
) -> HadamardFactor:
    """Finite-N distortion [G_N]_{n,m} = [n,m]^rho F(N/[n,m]) / F(N) on M x M.

    Entrywise G_N -> 1 as N grows while staying uniformly bounded; entries
    with [n, m] > N are 0.
    """
    if N < 1 or M < 1:
        raise ValueError("N and M must be >= 1")
    rho = 1.0 - 2.0 * sigma
    if table is None:
        table = PowerSumTable(sigma, N)
    ell = _lcm_grid(N, M)
    counts = np.where(ell <= N, N // ell, 0)
    vals = ell.astype(float) ** rho * table.at_int(counts) / table.at_int(N)
    return HadamardFactor(N, M, float(sigma), vals)


def _trace_power_even(D: np.ndarray, q: int) -> float:
    """Tr(D^q) for symmetric D and even q, via q/2 symmetric products."""
    half = q // 2
    P = D
    for _ in range(half - 1):
        P = P @ D
    return float(np.sum(P * P))  # = Tr(P^2) = Tr(D^q), P symmetric


def schatten_diff(N: int, M: int, q: int, sigma: float) -> float:
    """Truncated Schatten-q norm of E(sigma,1) o G_N - E(sigma,1) on M x M.

    Even q with q * rho > 1 only; the norm is (Tr D^q)^(1/q).  No tail
    certificate is claimed for the infinite matrix, so treat the output
    as the truncated norm.
    """
    q = int(q)
    if q < 2 or q % 2 != 0:
        raise InvalidRegime("Schatten exponent must be an even integer >= 2")
    rho = 1.0 - 2.0 * sigma
    if q * rho <= 1.0:
        raise InvalidRegime(f"needs q * rho > 1, got q={q}, rho={rho}")
    E = entry_matrix(SpectralParams(sigma, 1.0), M)
    G = hadamard_factor(N, M, sigma).values
    D = E * (G - 1.0)
    return _trace_power_even(D, q) ** (1.0 / q)
