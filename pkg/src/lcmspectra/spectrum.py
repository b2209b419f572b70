"""Global spectrum assembly for the LCM matrix family.

Eigenvalues of the infinite matrix factor over primes: lambda_n is the
product over p | n of the k_p-th local eigenvalue times the base product
Lambda_0 = prod_p lambda_0(E_p).  This module builds the per-prime table,
enumerates and sorts eigenvalues, evaluates the counting function
mu(t) = #{n : lambda_n > 1/t} behind a certified cutoff, and cross-checks
against dense finite sections.
"""

from __future__ import annotations

import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .arith import (
    FactoredIndex,
    SpectralParams,
    factorize,
    primes_up_to,
    smallest_prime_factor_table,
)
from .errors import (
    CertificateUnavailable,
    EigensolverError,
    EnumerationInfeasible,
    FloorTooHigh,
    InvalidRegime,
    PrimeOutOfRange,
)
from .local import (
    DEFAULT_FLOOR,
    a_norm_squared,
    best_envelope,
    hs_bound_squared,
    jacobi_eigh_batch,
    LocalSpectrum,
    truncation_tail_bound,
)

__all__ = [
    "GlobalEigenvalue",
    "GlobalSpectrumTable",
    "CountingResult",
    "SpectralEnvelope",
    "build_table",
    "base_product",
    "lambda_of",
    "enumerate_spectrum",
    "counting_mu",
    "finite_section_eigs",
    "entry_matrix",
    "save_table",
    "load_table",
]

# conservative allowance for Jacobi off-diagonal residue (1e-14 * trace <= 4)
_SOLVER_MARGIN = 1e-13
_BLOCK_ELEMS = 3_000_000


@dataclass(frozen=True)
class GlobalEigenvalue:
    """One eigenvalue lambda_n, indexed by the factorisation of n."""

    n: int
    factored: FactoredIndex
    value: float


@dataclass(frozen=True)
class SpectralEnvelope:
    """Certified bound lambda_n <= prefactor * n^(-(rho - epsilon)).

    c_star collects the per-prime ratio bounds inside the table; epsilon
    absorbs primes beyond the cutoff (at most log n / log p_max of them
    divide n, each contributing at most the optimal sandwich constant).
    cap bounds any eigenvalue whose exponent fell outside the included
    ranges, so the certificate is valid for thresholds above
    prefactor * cap.
    """

    c_star: float
    epsilon: float
    cap: float
    prefactor: float


@dataclass(frozen=True)
class CountingResult:
    """mu(t) together with the certified enumeration cutoff behind it."""

    t: float
    mu: int
    n_cut: int
    c_star: float
    epsilon: float


def _product_tail_bound(params: SpectralParams, p_max: int) -> float:
    """Closed bound on sum_{m > p_max} log lambda_0(E_m) over integers m.

    Every prime is an integer, so this majorises the prime tail of the
    base product.  Uses the certified per-base excess a^2/(1-h), its
    monotonicity in the base, and integral comparison.
    """
    tpr = params.tau + params.rho
    h = p_max ** (-params.rho) * math.sqrt(hs_bound_squared(p_max, params))
    if h >= 1.0:
        raise CertificateUnavailable(
            f"tail certificate needs h(p_max) < 1, got {h:.4f} at p_max={p_max}"
        )
    coeff = 1.0 / ((1.0 - p_max ** (-tpr)) * (1.0 - h))
    return coeff * p_max ** (1.0 - tpr) / (tpr - 1.0)


class GlobalSpectrumTable:
    """Per-prime spectra below a cutoff plus the assembled base product.

    Read-only after construction; queries are safe from multiple threads
    (the lazily built envelope and value caches are idempotent, so a race
    merely recomputes identical content).  Construction parallelises over
    primes with a deterministic ordered reduction (ascending p,
    compensated log summation).
    """

    def __init__(self, params, p_max, floor, primes, eigenvalues, overlaps, orders):
        self.params = params
        self.p_max = int(p_max)
        self.floor = float(floor)
        self.primes = primes
        # eigenvalues: ragged list, kept spectrum per prime (descending)
        self.lambda0 = np.array([e[0] for e in eigenvalues])
        self.ratios = [e[1:] / e[0] for e in eigenvalues]
        self.overlaps = overlaps
        self.trunc_orders = orders
        self.tail_bounds = truncation_tail_bound(
            primes.astype(float), params, orders.astype(float)
        )
        self._index = {int(p): i for i, p in enumerate(primes)}
        self.base_product = math.exp(math.fsum(np.log(self.lambda0)))
        try:
            self.tail_exponent_bound = _product_tail_bound(params, self.p_max)
        except CertificateUnavailable:
            # enumeration still works; only tail-certified queries must fail
            self.tail_exponent_bound = math.inf
        self._envelope: SpectralEnvelope | None = None
        self._values: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.primes)

    def index_of(self, p: int) -> int:
        try:
            return self._index[int(p)]
        except KeyError:
            raise PrimeOutOfRange(f"prime {p} exceeds table cutoff {self.p_max}") from None

    def local(self, p: int) -> LocalSpectrum:
        """Reassemble the stored LocalSpectrum for one prime."""
        i = self.index_of(p)
        eig = np.concatenate([[1.0], self.ratios[i]]) * self.lambda0[i]
        return LocalSpectrum(
            p=float(p),
            params=self.params,
            truncation_order=int(self.trunc_orders[i]),
            eigenvalues=eig,
            top_overlap=float(self.overlaps[i]),
            tail_bound=float(self.tail_bounds[i]),
            floor=self.floor,
        )

    def envelope(self) -> SpectralEnvelope:
        if self._envelope is None:
            self._envelope = _build_envelope(self)
        return self._envelope


def _solve_block(params: SpectralParams, ps: np.ndarray, K: int):
    j = np.arange(K, dtype=float)
    expo = params.sigma * (j[:, None] + j[None, :]) - params.tau * np.maximum(
        j[:, None], j[None, :]
    )
    mats = np.exp(np.log(ps.astype(float))[:, None, None] * expo[None, :, :])
    eig, ovl = jacobi_eigh_batch(mats)
    return eig, ovl[:, 0]


def build_table(
    params: SpectralParams,
    p_max: int,
    target_floor: float = DEFAULT_FLOOR,
    threads: int = 1,
    cache_dir: str | os.PathLike | None = None,
) -> GlobalSpectrumTable:
    """Diagonalise every prime-local block with p <= p_max.

    Blocks share a truncation order K in long runs of consecutive primes,
    so the Jacobi sweeps run batched per K group (split across threads
    when requested).  cache_dir, when given, persists the per-prime
    records in the binary table format and reuses them on rebuild.
    """
    params.require_regime()
    p_max = int(p_max)
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    cache_path = None
    if cache_dir:
        cache_path = _cache_path(cache_dir, params, p_max, target_floor)
        if os.path.exists(cache_path):
            cached = load_table(cache_path)
            if cached is not None:
                return cached

    primes = primes_up_to(p_max)
    logs = np.log(primes.astype(float))
    orders = np.ceil(
        math.log(target_floor / 10.0) / (-params.rho * logs)
    ).astype(np.int64) + 2
    orders = np.maximum(orders, 3)

    eig_rows: list[np.ndarray | None] = [None] * len(primes)
    overlaps = np.empty(len(primes))

    def submit(lo: int, hi: int, K: int):
        return (lo, hi), _solve_block(params, primes[lo:hi], K)

    jobs = []
    for K in np.unique(orders):
        idx = np.flatnonzero(orders == K)
        lo, hi = int(idx[0]), int(idx[-1]) + 1
        if hi - lo != len(idx):  # orders are monotone in p; guard anyway
            raise EigensolverError("non-contiguous truncation-order group")
        chunk = max(1, _BLOCK_ELEMS // int(K * K))
        for start in range(lo, hi, chunk):
            jobs.append((start, min(start + chunk, hi), int(K)))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda j: submit(*j), jobs))
    else:
        results = [submit(*j) for j in jobs]

    for (lo, hi), (eig, ovl) in results:
        overlaps[lo:hi] = ovl
        for i in range(lo, hi):
            row = eig[i - lo]
            kept = row[row > target_floor]
            if kept.size == 0 or kept[0] < 1.0 - 1e-10:
                raise EigensolverError(
                    f"inconsistent local spectrum at p={int(primes[i])}"
                )
            eig_rows[i] = kept

    table = GlobalSpectrumTable(
        params, p_max, target_floor, primes, eig_rows, overlaps, orders
    )
    if cache_path:
        save_table(table, cache_path)
    return table


def base_product(
    params: SpectralParams,
    p_max: int,
    target_floor: float = DEFAULT_FLOOR,
    threads: int = 1,
) -> tuple[float, float]:
    """(Lambda_0, t_bound): product of top local eigenvalues over p <= p_max
    and a certified bound on the log of the remaining infinite tail, so the
    full product lies in [Lambda_0, Lambda_0 * exp(t_bound)].

    In weakly decaying regimes a small p_max may admit no certificate at
    all; t_bound is then inf and only tail-certified queries are blocked.
    """
    table = build_table(params, p_max, target_floor, threads)
    return table.base_product, table.tail_exponent_bound


def lambda_of(n: int, table: GlobalSpectrumTable) -> GlobalEigenvalue:
    """lambda_n via the product formula: Lambda_0 times per-prime ratios."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    fi = factorize(int(n))
    value = table.base_product
    for p, k in fi.factors:
        if p > table.p_max:
            raise PrimeOutOfRange(
                f"prime factor {p} of n={n} exceeds table cutoff {table.p_max}"
            )
        r = table.ratios[table.index_of(p)]
        if k > r.size:
            raise FloorTooHigh(
                f"lambda_{k}(E_{p}) lies below the floor {table.floor}"
            )
        value *= r[k - 1]
    return GlobalEigenvalue(int(n), fi, value)


def _lambda_values(table: GlobalSpectrumTable, n_max: int) -> np.ndarray:
    """values[n] = lambda_n for 1 <= n <= n_max; exponents below the floor
    contribute 0 (kept total, never silently wrong)."""
    if table._values is not None and table._values.size > n_max:
        return table._values[: n_max + 1]
    spf = smallest_prime_factor_table(n_max)
    vals = np.zeros(n_max + 1)
    vals[1] = table.base_product
    ratios = table.ratios
    index = table._index
    for n in range(2, n_max + 1):
        p = int(spf[n])
        m = n // p
        k = 1
        while m % p == 0:
            m //= p
            k += 1
        r = ratios[index[p]]
        vals[n] = vals[m] * r[k - 1] if k <= r.size else 0.0
    table._values = vals
    return vals


def enumerate_spectrum(table: GlobalSpectrumTable, n_max: int) -> list[GlobalEigenvalue]:
    """lambda_n for n = 1..n_max, sorted by value descending, ties by n.

    Needs p_max >= n_max so that every index factors inside the table.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > table.p_max:
        raise PrimeOutOfRange(
            f"enumeration needs p_max >= n_max, got p_max={table.p_max} < {n_max}"
        )
    vals = _lambda_values(table, n_max)[1:]
    ns = np.arange(1, n_max + 1)
    order = np.lexsort((ns, -vals))
    return [
        GlobalEigenvalue(int(ns[i]), factorize(int(ns[i])), float(vals[i]))
        for i in order
    ]


def _build_envelope(table: GlobalSpectrumTable) -> SpectralEnvelope:
    params = table.params
    rho = params.rho
    log_cstar = 0.0
    cap = table.floor
    for i in range(len(table.primes)):
        lam0 = table.lambda0[i]
        lamk = table.ratios[i] * lam0
        err = float(table.tail_bounds[i]) + _SOLVER_MARGIN
        logp = math.log(table.primes[i])
        # only eigenvalues far above the error margin enter the ratio product;
        # everything deeper is covered by the cap clause below
        inc = lamk >= 1e4 * err
        if inc.any():
            k = np.flatnonzero(inc) + 1.0
            f = float(np.max(np.log((lamk[inc] + err) / (lam0 - err)) + rho * k * logp))
            if f > 0.0:
                log_cstar += f
        excluded = lamk[~inc]
        cap = max(cap, (float(excluded[0]) if excluded.size else table.floor) + err)
    eps = math.log(best_envelope(float(table.p_max), params).c_upper) / math.log(
        table.p_max
    )
    c_star = math.exp(log_cstar)
    prefactor = c_star * table.base_product * math.exp(table.tail_exponent_bound)
    return SpectralEnvelope(c_star=c_star, epsilon=eps, cap=cap, prefactor=prefactor)


def counting_mu(
    table: GlobalSpectrumTable, t: float, max_enumeration: int = 2_000_000
) -> CountingResult:
    """mu(t) = #{n : lambda_n > 1/t}, exact behind a certified cutoff.

    The cutoff comes from the envelope lambda_n <= prefactor * n^-(rho-eps):
    indices beyond it cannot qualify, indices below it are enumerated and
    counted directly.
    """
    if t <= 0.0:
        raise ValueError("t must be positive")
    env = table.envelope()
    if not math.isfinite(env.prefactor):
        raise CertificateUnavailable(
            f"no certified tail bound at p_max={table.p_max} in this regime; "
            "enlarge p_max"
        )
    threshold = 1.0 / t
    if threshold <= 2.0 * env.prefactor * env.cap:
        raise EnumerationInfeasible(
            f"threshold 1/t={threshold:.3g} is too close to the numerical floor "
            f"({env.prefactor * env.cap:.3g}) for a certified count"
        )
    expo = table.params.rho - env.epsilon
    if expo <= 0.0:
        raise CertificateUnavailable("envelope exponent correction exceeds rho")
    x = env.prefactor * t
    if x <= 1.0:
        return CountingResult(float(t), 0, 0, env.c_star, env.epsilon)
    n_cut = int(math.ceil(x ** (1.0 / expo)))
    if n_cut > table.p_max:
        raise EnumerationInfeasible(
            f"certified cutoff {n_cut} exceeds table coverage p_max={table.p_max}",
            required=n_cut,
        )
    if n_cut > max_enumeration:
        raise EnumerationInfeasible(
            f"certified cutoff {n_cut} exceeds max_enumeration={max_enumeration}",
            required=n_cut,
        )
    vals = _lambda_values(table, n_cut)
    mu = int(np.count_nonzero(vals[1:] > threshold))
    return CountingResult(float(t), mu, n_cut, env.c_star, env.epsilon)


def entry_matrix(params: SpectralParams, N: int) -> np.ndarray:
    """Dense top-left N x N block of the infinite matrix (log-space entries)."""
    if N < 1:
        raise ValueError("N must be >= 1")
    n = np.arange(1, N + 1)
    g = np.gcd.outer(n, n)
    ell = (n[:, None] // g) * n[None, :]
    logn = np.log(n.astype(float))
    return np.exp(
        params.sigma * (logn[:, None] + logn[None, :])
        - params.tau * np.log(ell.astype(float))
    )


def finite_section_eigs(params: SpectralParams, N: int) -> np.ndarray:
    """Eigenvalues of the N x N finite section, descending.

    Cross-validation route against the product formula (min-max pushes
    every finite-section eigenvalue below its infinite counterpart).
    Uses the platform symmetric eigensolver; sections are dense.
    """
    if not params.bounded:
        raise InvalidRegime("finite sections are only meaningful in the bounded regime")
    return np.linalg.eigvalsh(entry_matrix(params, N))[::-1]


# ---------------------------------------------------------------------------
# binary persistence (little-endian, all payload as float64)
# ---------------------------------------------------------------------------

_MAGIC = b"LSPC"
_VERSION = 1


def _cache_path(cache_dir, params, p_max, floor):
    name = (
        f"table_s{params.sigma:.17g}_t{params.tau:.17g}"
        f"_f{floor:.6g}_P{int(p_max)}.lsp"
    )
    return os.path.join(os.fspath(cache_dir), name)


def save_table(table: GlobalSpectrumTable, path) -> None:
    """Write the per-prime records: versioned header, then for each prime
    (p, K, eigenvalues, overlap) as little-endian float64."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", _VERSION))
        fh.write(
            struct.pack(
                "<3dQ", table.params.sigma, table.params.tau, table.floor, table.p_max
            )
        )
        fh.write(struct.pack("<Q", len(table.primes)))
        for i, p in enumerate(table.primes):
            eig = np.concatenate([[1.0], table.ratios[i]]) * table.lambda0[i]
            rec = np.empty(eig.size + 3)
            rec[0] = float(p)
            rec[1] = float(eig.size)
            rec[2:-1] = eig
            rec[-1] = table.overlaps[i]
            fh.write(rec.astype("<f8").tobytes())


def load_table(path) -> GlobalSpectrumTable | None:
    """Read a table written by save_table; None if the header mismatches."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != _MAGIC:
        return None
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != _VERSION:
        return None
    sigma, tau, floor, p_max = struct.unpack_from("<3dQ", raw, 8)
    (count,) = struct.unpack_from("<Q", raw, 40)
    params = SpectralParams(sigma, tau)
    body = np.frombuffer(raw, dtype="<f8", offset=48)
    primes = np.empty(count, dtype=np.int64)
    eig_rows = []
    overlaps = np.empty(count)
    pos = 0
    for i in range(count):
        primes[i] = int(body[pos])
        size = int(body[pos + 1])
        eig_rows.append(np.array(body[pos + 2 : pos + 2 + size]))
        overlaps[i] = body[pos + 2 + size]
        pos += size + 3
    logs = np.log(primes.astype(float))
    orders = np.ceil(math.log(floor / 10.0) / (-params.rho * logs)).astype(np.int64) + 2
    orders = np.maximum(orders, 3)
    return GlobalSpectrumTable(
        params, int(p_max), floor, primes, eig_rows, overlaps, orders
    )
