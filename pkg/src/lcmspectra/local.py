"""Prime-local blocks E_p(sigma, tau): spectra and certified envelopes.

The block at base p has entries p^(sigma (j+k) - tau max(j,k)) for
j, k >= 0.  The base may be any real p > 1; integer primality plays no
role in the linear algebra, and prime-indexed callers simply restrict to
primes.  All returned values are immutable and shareable across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import SpectralParams
from .errors import CertificateUnavailable, EigensolverError, InvalidRegime

__all__ = [
    "LocalSpectrum",
    "SandwichEnvelope",
    "TopEigenvalueCertificate",
    "jacobi_eigh",
    "jacobi_eigh_batch",
    "build_local_matrix",
    "truncation_order",
    "truncation_tail_bound",
    "local_spectrum",
    "sandwich_envelope",
    "best_envelope",
    "corner_quadratic_form",
    "a_norm_squared",
    "hs_bound_squared",
    "top_eig_certificate",
]

JACOBI_REL_OFF = 1e-14
DEFAULT_FLOOR = 1e-14


# ---------------------------------------------------------------------------
# cyclic Jacobi eigensolver
# ---------------------------------------------------------------------------

def _offdiag_sq(A: np.ndarray) -> np.ndarray:
    # summed directly off the diagonal: subtracting the diagonal mass from
    # the total squares would drown the result in cancellation noise
    off = A.copy()
    idx = np.arange(A.shape[1])
    off[:, idx, idx] = 0.0
    return np.einsum("bij,bij->b", off, off)


def _rotate(A: np.ndarray, row0: np.ndarray, p: int, q: int) -> None:
    apq = A[:, p, q].copy()
    if not np.any(apq != 0.0):
        return
    app = A[:, p, p].copy()
    aqq = A[:, q, q].copy()
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        tau = (aqq - app) / (2.0 * apq)
        sgn = np.where(tau >= 0.0, 1.0, -1.0)
        t = sgn / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
    # apq == 0 gives tau = nan; huge tau gives t -> 0 through the inf denominator
    t = np.where(np.isfinite(t), t, 0.0)
    t = np.where(apq == 0.0, 0.0, t)
    c = 1.0 / np.sqrt(1.0 + t * t)
    s = t * c
    cN, sN = c[:, None], s[:, None]

    rp, rq = A[:, p, :].copy(), A[:, q, :].copy()
    A[:, p, :] = cN * rp - sN * rq
    A[:, q, :] = sN * rp + cN * rq
    cp, cq = A[:, :, p].copy(), A[:, :, q].copy()
    A[:, :, p] = cN * cp - sN * cq
    A[:, :, q] = sN * cp + cN * cq
    # closed-form diagonal update and exact annihilation keep symmetry clean
    A[:, p, p] = app - t * apq
    A[:, q, q] = aqq + t * apq
    A[:, p, q] = 0.0
    A[:, q, p] = 0.0

    r0p, r0q = row0[:, p].copy(), row0[:, q].copy()
    row0[:, p] = c * r0p - s * r0q
    row0[:, q] = s * r0p + c * r0q


def jacobi_eigh_batch(
    mats: np.ndarray,
    rel_off: float = JACOBI_REL_OFF,
    max_sweeps: int = 60,
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi diagonalisation of a stack of symmetric matrices.

    Rotates every (p, q) pair per sweep and stops once each matrix has
    off-diagonal Frobenius norm below rel_off times its trace.  Returns
    (eigenvalues, overlaps): eigenvalues of shape (B, K) in descending
    order per matrix, and the matching |first components| of the
    eigenvectors.

    Jacobi retains high relative accuracy on graded positive definite
    matrices, which is exactly the shape of the prime-local blocks.
    """
    A = np.array(mats, dtype=np.float64, copy=True)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError("expected a (B, K, K) stack of square matrices")
    B, K, _ = A.shape
    row0 = np.zeros((B, K))
    row0[:, 0] = 1.0
    if K > 1:
        threshold = rel_off * np.abs(np.trace(A, axis1=1, axis2=2))
        for _ in range(max_sweeps + 1):
            off = np.sqrt(np.maximum(_offdiag_sq(A), 0.0))
            if np.all(off <= threshold):
                break
            for p in range(K - 1):
                for q in range(p + 1, K):
                    _rotate(A, row0, p, q)
        else:
            raise EigensolverError(
                f"Jacobi failed to converge within {max_sweeps} sweeps"
            )
    eig = np.diagonal(A, axis1=1, axis2=2).copy()
    order = np.argsort(-eig, axis=1, kind="stable")
    eig = np.take_along_axis(eig, order, axis=1)
    ovl = np.abs(np.take_along_axis(row0, order, axis=1))
    return eig, ovl


def jacobi_eigh(mat: np.ndarray, **kw) -> tuple[np.ndarray, np.ndarray]:
    """Single-matrix wrapper around jacobi_eigh_batch."""
    eig, ovl = jacobi_eigh_batch(np.asarray(mat, dtype=float)[None, :, :], **kw)
    return eig[0], ovl[0]


# ---------------------------------------------------------------------------
# local blocks and their spectra
# ---------------------------------------------------------------------------

def build_local_matrix(p: float, params: SpectralParams, K: int) -> np.ndarray:
    """K x K upper-left block: entry (j, k) = p^(sigma (j+k) - tau max(j,k))."""
    if p <= 1.0:
        raise ValueError("base p must exceed 1")
    if K < 1:
        raise ValueError("K must be >= 1")
    j = np.arange(K, dtype=float)
    expo = params.sigma * (j[:, None] + j[None, :]) - params.tau * np.maximum(
        j[:, None], j[None, :]
    )
    return np.exp(math.log(p) * expo)


def truncation_order(p: float, params: SpectralParams, target_floor: float) -> int:
    """Block size placing the discarded diagonal a decade below the floor.

    The diagonal p^(-rho k) sets the scale of what truncation throws away;
    two extra rows add safety margin.
    """
    K = math.ceil(math.log(target_floor / 10.0) / (-params.rho * math.log(p))) + 2
    return max(K, 3)


def truncation_tail_bound(p, params: SpectralParams, K) -> np.ndarray | float:
    """Hilbert-Schmidt norm of everything outside the K x K block, closed form.

    By Weyl's inequality this bounds the shift of every eigenvalue caused
    by truncating the infinite block to K x K.  Vectorises over p.
    """
    p = np.asarray(p, dtype=float)
    rho = params.rho
    x2r = p ** (-2.0 * rho)
    xtr = p ** (-(params.tau + rho))
    diag = x2r**K / (1.0 - x2r)
    if params.sigma == 0.0:
        y = p ** (-2.0 * params.tau)
        cross = 2.0 * y**K * (K - (K - 1) * y) / (1.0 - y) ** 2
    else:
        w = p ** (2.0 * params.sigma)
        cross = 2.0 / (1.0 - w) * (xtr**K / (1.0 - xtr) - x2r**K / (1.0 - x2r))
    out = np.sqrt(np.maximum(diag + cross, 0.0))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class LocalSpectrum:
    """Truncated eigendecomposition of one prime-local block.

    eigenvalues holds everything above the floor, in descending order;
    top_overlap is |<top eigenvector, e_0>|; tail_bound is a rigorous
    Weyl bound on the truncation effect.
    """

    p: float
    params: SpectralParams
    truncation_order: int
    eigenvalues: np.ndarray
    top_overlap: float
    tail_bound: float
    floor: float

    @property
    def ratios(self) -> np.ndarray:
        """lambda_k / lambda_0 for k >= 1."""
        return self.eigenvalues[1:] / self.eigenvalues[0]


def local_spectrum(
    p: float, params: SpectralParams, target_floor: float = DEFAULT_FLOOR
) -> LocalSpectrum:
    """Eigenvalues of the block at base p above target_floor, descending.

    Chooses the truncation order from the floor, runs cyclic Jacobi, and
    discards eigenvalues at or below the floor as numerically
    untrustworthy.
    """
    if params.rho <= 0.0 or params.tau <= 0.0:
        raise InvalidRegime(
            f"local spectra need rho > 0 and tau > 0, got rho={params.rho}, tau={params.tau}"
        )
    if not (0.0 < target_floor < 1.0):
        raise ValueError("target_floor must lie in (0, 1)")
    if p <= 1.0:
        raise ValueError("base p must exceed 1")
    K = truncation_order(p, params, target_floor)
    eig, ovl = jacobi_eigh(build_local_matrix(p, params, K))
    keep = eig > target_floor
    kept = eig[keep]
    if kept.size == 0 or kept[0] < 1.0 - 1e-10:
        raise EigensolverError(
            f"top eigenvalue {eig[0]!r} below 1 contradicts the Rayleigh quotient at e_0"
        )
    return LocalSpectrum(
        p=float(p),
        params=params,
        truncation_order=K,
        eigenvalues=kept,
        top_overlap=float(ovl[0]),
        tail_bound=float(truncation_tail_bound(p, params, K)),
        floor=float(target_floor),
    )


# ---------------------------------------------------------------------------
# certified envelopes and identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SandwichEnvelope:
    """Two-sided bound c_lower p^(-rho k) <= lambda_k <= c_upper p^(-rho k).

    lower_clamped marks the mixing parameters where the lower constant
    degenerates (a >= sqrt(q)) and is clamped to 0.
    """

    p: float
    params: SpectralParams
    a: float
    c_lower: float
    c_upper: float
    valid: bool
    lower_clamped: bool = False

    def lower(self, k) -> np.ndarray | float:
        return self.c_lower * self.p ** (-self.params.rho * np.asarray(k, dtype=float))

    def upper(self, k) -> np.ndarray | float:
        return self.c_upper * self.p ** (-self.params.rho * np.asarray(k, dtype=float))


def sandwich_envelope(p: float, params: SpectralParams, a: float) -> SandwichEnvelope:
    """Eigenvalue envelope from the diagonal comparison at q = p^tau.

    Valid for mixing parameters a > q^(-1/2)/(1 - 1/q); raises otherwise.
    c_lower is only meaningful for a < sqrt(q) and is clamped to 0 beyond.
    """
    q = float(p) ** params.tau
    if q <= 1.0:
        raise InvalidRegime("sandwich comparison needs p^tau > 1")
    u = 1.0 / math.sqrt(q)
    upper_denom = 1.0 - 1.0 / q - u / a if a > 0 else -1.0
    if a <= 0 or upper_denom <= 0.0:
        raise ValueError(
            f"mixing parameter a={a} invalid at q={q}: needs a > {u / (1.0 - 1.0 / q):.6g}"
        )
    c_upper = (1.0 - 1.0 / q) * (1.0 + a * u) / upper_denom
    num = 1.0 - a * u
    clamped = num <= 0.0
    c_lower = 0.0 if clamped else (1.0 - 1.0 / q) * num / (1.0 - 1.0 / q + u / a)
    return SandwichEnvelope(
        p=float(p),
        params=params,
        a=float(a),
        c_lower=c_lower,
        c_upper=c_upper,
        valid=True,
        lower_clamped=clamped,
    )


def best_envelope(p: float, params: SpectralParams) -> SandwichEnvelope:
    """Envelope at the c_upper-minimising mixing parameter.

    Calculus on the upper constant gives the optimum a* = 1/(1 - q^(-1/2)),
    always admissible, where c_upper collapses to
    (1 + q^(-1/2)) / (1 - q^(-1/2)).
    """
    q = float(p) ** params.tau
    if q <= 1.0:
        raise InvalidRegime("sandwich comparison needs p^tau > 1")
    return sandwich_envelope(p, params, 1.0 / (1.0 - 1.0 / math.sqrt(q)))


def corner_quadratic_form(p: float, x) -> tuple[float, float]:
    """<E_p(0,1) x, x> evaluated along two independent routes.

    lhs sums the matrix entries p^(-max(j,k)) directly; rhs uses the
    corner decomposition (1 - 1/p) sum_k p^(-k) |x_0 + ... + x_k|^2, with
    the geometric tail beyond the support of x summed in closed form.
    """
    if p <= 1.0:
        raise ValueError("base p must exceed 1")
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("x must be a non-empty one-dimensional sequence")
    L = x.size
    j = np.arange(L, dtype=float)
    M = float(p) ** (-np.maximum(j[:, None], j[None, :]))
    lhs = float(x @ M @ x)
    csum = np.cumsum(x)
    weights = float(p) ** (-j)
    rhs = (1.0 - 1.0 / p) * math.fsum(weights * csum**2)
    rhs += float(p) ** (-float(L)) * csum[-1] ** 2
    return lhs, rhs


def a_norm_squared(p: float, params: SpectralParams) -> float:
    """Squared norm of the first-column tail {p^(-k (tau - sigma))}_{k>=1}."""
    if params.tau <= params.sigma:
        raise InvalidRegime("the geometric series needs tau > sigma")
    x = float(p) ** (-2.0 * (params.tau - params.sigma))
    return x / (1.0 - x)


def hs_bound_squared(p: float, params: SpectralParams) -> float:
    """Closed upper bound for the squared Hilbert-Schmidt norm of the block."""
    if params.rho <= 0.0 or params.tau + params.rho <= 0.0:
        raise InvalidRegime("Hilbert-Schmidt bound needs rho > 0 and tau + rho > 0")
    return 2.0 / (
        (1.0 - float(p) ** (-2.0 * (params.tau + params.rho)))
        * (1.0 - float(p) ** (-2.0 * params.rho))
    )


@dataclass(frozen=True)
class TopEigenvalueCertificate:
    """Interval [1, 1 + bound] certified to contain the top local eigenvalue."""

    p: float
    params: SpectralParams
    bound: float
    h: float

    @property
    def interval(self) -> tuple[float, float]:
        return (1.0, 1.0 + self.bound)

    def contains(self, value: float, slack: float = 1e-12) -> bool:
        return 1.0 - slack <= value <= 1.0 + self.bound + slack


def top_eig_certificate(p: float, params: SpectralParams) -> TopEigenvalueCertificate:
    """Certified enclosure of lambda_0(E_p) from the resolvent identity.

    Writing the block with its first row and column separated gives
    lambda_0 = 1 + <(lambda_0 - E_perp)^(-1) a, a>, and ||E_perp|| is
    majorised by h = p^(-rho) HS(E_p) using the closed Hilbert-Schmidt
    bound (no summation truncation enters, so the enclosure is rigorous
    in exact arithmetic).  Unavailable when h >= 1; callers then fall
    back on the eigensolver value without a certificate.
    """
    h = float(p) ** (-params.rho) * math.sqrt(hs_bound_squared(p, params))
    if h >= 1.0:
        raise CertificateUnavailable(
            f"h = {h:.4f} >= 1 at p = {p}; no certified top-eigenvalue bound"
        )
    return TopEigenvalueCertificate(
        p=float(p),
        params=params,
        bound=a_norm_squared(p, params) / (1.0 - h),
        h=h,
    )
