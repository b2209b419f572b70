"""Command-line surface with reproducible CSV/JSON outputs.

Every output file starts with a comment recording the full parameter set
and the artifact version (JSON documents carry it as a leading "_comment"
field since JSON has no comment syntax).  Floats are printed with 17
significant digits so reruns with identical flags are byte-identical.

Exit codes: 0 success, 2 invalid parameters, 3 certificate or coverage
unavailable, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .arith import SpectralParams, zeta_real
from .beurling import count_integers, system_from_spectra
from .errors import (
    CertificateUnavailable,
    EigensolverError,
    EnumerationInfeasible,
    FloorTooHigh,
    InvalidRegime,
    NoClosedForm,
    PrimeOutOfRange,
    VerificationFailed,
)
from .kappa import kappa_closed_form, kappa_numeric
from .local import (
    best_envelope,
    corner_quadratic_form,
    local_spectrum,
    sandwich_envelope,
)
from .spectrum import (
    build_table,
    counting_mu,
    enumerate_spectrum,
    finite_section_eigs,
)
from .toeplitz import (
    build_toeplitz,
    gram_via_formula,
    hadamard_factor,
    rescaled_singular_values,
    schatten_diff,
)

CACHE_ENV = "LCM_SPECTRA_CACHE_DIR"


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _comment(args: argparse.Namespace) -> str:
    skip = {"func", "out", "format"}
    parts = [
        f"{k}={v}"
        for k, v in sorted(vars(args).items())
        if k not in skip and v is not None
    ]
    return f"lcm-spectra {__version__} " + " ".join(parts)


def _emit(args, header: list[str], rows: list[list], fmt: str | None = None) -> None:
    fmt = fmt or getattr(args, "format", "csv")
    comment = _comment(args)
    if fmt == "json":
        payload = {
            "_comment": comment,
            "rows": [dict(zip(header, row)) for row in rows],
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    else:
        lines = ["# " + comment, ",".join(header)]
        lines += [",".join(_fmt(v) for v in row) for row in rows]
        text = "\n".join(lines) + "\n"
    _write(getattr(args, "out", None), text)


def _emit_json(args, payload: dict) -> None:
    payload = {"_comment": _comment(args), **payload}
    _write(getattr(args, "out", None), json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write(out, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _cache_dir() -> str | None:
    d = os.environ.get(CACHE_ENV)
    if d:
        os.makedirs(d, exist_ok=True)
    return d or None


def _table(args, p_max: int):
    return build_table(
        SpectralParams(args.sigma, args.tau),
        p_max,
        target_floor=args.floor,
        threads=args.threads,
        cache_dir=_cache_dir(),
    )


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_local_eigs(args) -> None:
    params = SpectralParams(args.sigma, args.tau)
    spec = local_spectrum(args.p, params, args.floor)
    env = (
        sandwich_envelope(args.p, params, args.a)
        if args.a is not None
        else best_envelope(args.p, params)
    )
    k = np.arange(spec.eigenvalues.size)
    rows = [
        [int(kk), float(lam), float(env.lower(kk)), float(env.upper(kk))]
        for kk, lam in zip(k, spec.eigenvalues)
    ]
    _emit(args, ["k", "lambda", "envelope_lo", "envelope_hi"], rows)


def cmd_spectrum(args) -> None:
    # the base product needs primes well beyond nmax to converge
    p_max = args.pmax or max(args.nmax, 10_000)
    table = _table(args, max(p_max, args.nmax))
    rho = table.params.rho
    rows = [
        [rank + 1, ev.n, ev.value, ev.n**rho * ev.value]
        for rank, ev in enumerate(enumerate_spectrum(table, args.nmax))
    ]
    _emit(args, ["rank", "n", "lambda", "n_rho_lambda"], rows)


def cmd_counting(args) -> None:
    table = _table(args, args.pmax)
    rho = table.params.rho
    result = counting_mu(table, args.t, max_enumeration=args.max_enum)
    fields = {
        "t": result.t,
        "mu": result.mu,
        "n_cut": result.n_cut,
        "c_star": result.c_star,
        "epsilon": result.epsilon,
        "mu_scaled": result.mu * result.t ** (-1.0 / rho),
    }
    if args.format == "csv":
        _emit(args, list(fields), [list(fields.values())])
    else:
        _emit_json(args, fields)
    if args.emit_plot_data:
        lo = min(args.t, max(10.0, args.t / 64.0))
        ts = np.geomspace(lo, args.t, num=13) if lo < args.t else np.array([args.t])
        lines = ["# " + _comment(args), "t,mu_t_scaled"]
        for t in ts:
            r = counting_mu(table, float(t), max_enumeration=args.max_enum)
            lines.append(f"{_fmt(float(t))},{_fmt(r.mu * t ** (-1.0 / rho))}")
        _write(args.emit_plot_data, "\n".join(lines) + "\n")


def cmd_kappa(args) -> None:
    params = SpectralParams(args.sigma, args.tau)
    table = _table(args, args.pmax)
    comp = kappa_numeric(
        params,
        p_max=args.pmax,
        target_floor=args.floor,
        threads=args.threads,
        extrapolate=None if not args.no_extrapolate else False,
        table=table,
    )
    try:
        closed = kappa_closed_form(params)
    except NoClosedForm:
        closed = None
    fields = {
        "kappa": comp.kappa,
        "uncertainty": comp.uncertainty,
        "closed_form": closed,
        "p_max": comp.p_max,
        "s": comp.s,
        "tail_exponent": comp.tail_exponent,
        "extrapolated": comp.extrapolated,
    }
    if args.format == "csv":
        _emit(args, list(fields), [list(fields.values())])
    else:
        _emit_json(args, fields)


def cmd_toeplitz_compare(args) -> None:
    if args.tau != 1.0:
        raise InvalidRegime("the Toeplitz comparison lives at tau = 1")
    table = _table(args, args.pmax)
    rescaled = rescaled_singular_values(args.n, args.sigma)
    top = min(args.top, args.n)
    reference = enumerate_spectrum(table, max(64, 4 * top))[:top]
    rows = []
    for rank in range(top):
        lam = reference[rank].value
        rows.append([rank + 1, float(rescaled[rank]), lam, float(rescaled[rank] / lam - 1.0)])
    _emit(args, ["rank", "rescaled_sv_sq", "lambda_product", "rel_gap"], rows)


def cmd_schatten(args) -> None:
    rows = []
    for N in args.n:
        rows.append([N, schatten_diff(N, args.m, args.q, args.sigma)])
    _emit(args, ["N", "schatten_q_truncated"], rows)


def cmd_beurling(args) -> None:
    p_max = args.pmax or int(1.25 * max(args.x)) + 10
    table = _table(args, p_max)
    system = system_from_spectra(table)
    rows = []
    for x in args.x:
        c = count_integers(system, x, max_count=args.max_enum)
        rows.append([x, c, c / x])
    _emit(args, ["x", "count", "c"], rows)


def _verify_checks(args):
    rng = np.random.RandomState(args.seed)
    params = SpectralParams(args.sigma, args.tau)

    def check_corner():
        worst = 0.0
        for p in (2, 3, 5, 17):
            for _ in range(25):
                x = rng.standard_normal(rng.randint(1, 24))
                lhs, rhs = corner_quadratic_form(p, x)
                scale = max(abs(lhs), abs(rhs), 1e-30)
                worst = max(worst, abs(lhs - rhs) / scale)
        return worst, worst < 1e-12

    def check_gram():
        worst = 0.0
        for N in (16, 64):
            for sigma in (0.0, 0.25):
                G = gram_via_formula(N, sigma).values
                T = build_toeplitz(N, sigma).values
                direct = T.T @ T
                worst = max(
                    worst,
                    float(np.max(np.abs(G - direct) / (np.abs(direct) + 1e-30))),
                )
        return worst, worst < 1e-10

    def check_trace():
        worst = 0.0
        for p in (2, 3, 5, 7, 11):
            spec = local_spectrum(p, SpectralParams(0.25, 1.5))
            total = (1.0 - 1.0 / p) * math.fsum(spec.eigenvalues)
            worst = max(worst, abs(total - 1.0))
        return worst, worst < 1e-10

    def check_second_moment():
        worst = 0.0
        for sigma in (0.0, 0.25):
            pars = SpectralParams(sigma, 0.5 + 2.0 * sigma)
            for p in (2, 3, 5):
                spec = local_spectrum(p, pars)
                lhs = (1.0 - 1.0 / p) * math.fsum(spec.eigenvalues**2)
                rhs = (1.0 - p ** (-(2.0 + 4.0 * sigma))) / (
                    1.0 - p ** (-(1.0 + 2.0 * sigma))
                ) ** 2
                worst = max(worst, abs(lhs - rhs))
        return worst, worst < 1e-10

    def check_envelope():
        ok = True
        for p in (3, 5, 7, 11, 13):
            spec = local_spectrum(p, params)
            env = best_envelope(p, params)
            k = np.arange(spec.eigenvalues.size)
            ok &= bool(np.all(spec.eigenvalues <= env.upper(k) + 1e-12))
            ok &= bool(np.all(spec.eigenvalues >= env.lower(k) - 1e-12))
        return 0.0, ok

    def check_zeta():
        err = abs(zeta_real(2.0) - math.pi**2 / 6.0)
        return err, err < 1e-12

    return [
        ("identity-corner", check_corner),
        ("gram-vs-product", check_gram),
        ("trace-rho1", check_trace),
        ("second-moment-rho-half", check_second_moment),
        ("sandwich-envelope", check_envelope),
        ("zeta-pi2-over-6", check_zeta),
    ]


def cmd_verify(args) -> None:
    rows = []
    failed = []
    for name, fn in _verify_checks(args):
        measure, ok = fn()
        rows.append([name, "PASS" if ok else "FAIL", float(measure)])
        print(f"{'PASS' if ok else 'FAIL'} {name} (measure={measure:.3g})")
        if not ok:
            failed.append(name)
    if getattr(args, "out", None):
        _emit(args, ["check", "status", "measure"], rows)
    if failed:
        raise VerificationFailed(f"checks out of tolerance: {', '.join(failed)}")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_common(sp, sigma=True, tau=True):
    if sigma:
        sp.add_argument("--sigma", type=float, required=True)
    if tau:
        sp.add_argument("--tau", type=float, required=True)
    sp.add_argument("--out", default=None, help="output path ('-' or omit for stdout)")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--floor", type=float, default=1e-14)
    sp.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lcm-spectra",
        description="Spectra of the arithmetical LCM matrix family and its applications.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("local-eigs", help="eigenvalues of one prime-local block")
    _add_common(sp)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--a", type=float, default=None, help="envelope mixing parameter")
    sp.set_defaults(func=cmd_local_eigs)

    sp = sub.add_parser("spectrum", help="sorted global eigenvalues lambda_n")
    _add_common(sp)
    sp.add_argument("--nmax", type=int, required=True)
    sp.add_argument("--pmax", type=int, default=None)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("counting", help="eigenvalue counting function mu(t)")
    _add_common(sp)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--pmax", type=int, default=100_000)
    sp.add_argument("--max-enum", type=int, default=2_000_000)
    sp.add_argument("--emit-plot-data", default=None, metavar="PATH")
    sp.set_defaults(func=cmd_counting, format="json")

    sp = sub.add_parser("kappa", help="asymptotic constant kappa(sigma, tau)")
    _add_common(sp)
    sp.add_argument("--pmax", type=int, default=1_000_000)
    sp.add_argument("--no-extrapolate", action="store_true")
    sp.set_defaults(func=cmd_kappa, format="json")

    sp = sub.add_parser(
        "toeplitz-compare", help="rescaled singular values vs global eigenvalues"
    )
    _add_common(sp, tau=False)
    sp.add_argument("--tau", type=float, default=1.0)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--pmax", type=int, default=100_000)
    sp.set_defaults(func=cmd_toeplitz_compare)

    sp = sub.add_parser("schatten", help="truncated Schatten norm of the distortion")
    _add_common(sp, tau=False)
    sp.add_argument("--q", type=int, required=True)
    sp.add_argument("--m", type=int, default=256)
    sp.add_argument(
        "--n",
        type=lambda s: [int(v) for v in s.split(",")],
        required=True,
        help="comma-separated truncation sizes",
    )
    sp.set_defaults(func=cmd_schatten)

    sp = sub.add_parser("beurling", help="generalized-integer counting")
    _add_common(sp)
    sp.add_argument(
        "--x",
        type=lambda s: [float(v) for v in s.split(",")],
        required=True,
        help="comma-separated evaluation points",
    )
    sp.add_argument("--pmax", type=int, default=None)
    sp.add_argument("--max-enum", type=int, default=5_000_000)
    sp.set_defaults(func=cmd_beurling)

    sp = sub.add_parser("verify", help="run the exact-identity self checks")
    _add_common(sp, sigma=False, tau=False)
    sp.add_argument("--sigma", type=float, default=0.25)
    sp.add_argument("--tau", type=float, default=1.5)
    sp.add_argument("--seed", type=int, default=1234)
    sp.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse errors mean invalid parameters
        code = exc.code or 0
        return 0 if code == 0 else 2
    try:
        args.func(args)
        return 0
    except (InvalidRegime, NoClosedForm, ValueError) as exc:
        print(f"error: invalid parameters: {exc}", file=sys.stderr)
        return 2
    except (
        CertificateUnavailable,
        EnumerationInfeasible,
        PrimeOutOfRange,
        FloorTooHigh,
    ) as exc:
        print(f"error: certificate unavailable: {exc}", file=sys.stderr)
        return 3
    except (EigensolverError, VerificationFailed, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return 4


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
