"""Command-line front end.

Exit codes: 0 ok, 2 parse error, 3 validation failure, 4 numeric invariant
violation, 5 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import asymptotic as A
from . import coin, csvio
from . import distribution as D
from . import kernel as K
from . import oracle, sampling
from .config import (TOL, NumericError, ParameterError, ResourceError, StructuralError,
                     UsageError)

PRESETS = {
    "fig1a": ("example_ii", {}, 200, 200_000),
    "fig1b": ("example_v3", {}, 200, 200_000),
    "fig2": ("example_iv", {"q": 0.0}, 200, 200_000),
}

EXIT_OK, EXIT_PARSE, EXIT_VALIDATION, EXIT_NUMERIC, EXIT_RESOURCE = 0, 2, 3, 4, 5


class ParseFailure(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _init_arg(text: str) -> D.WalkerInit:
    """``"m:amp,m:amp"`` pure state with real or Python-complex amplitudes."""
    try:
        amps = {}
        for part in text.split(","):
            m, amp = part.split(":")
            amps[int(m)] = complex(amp.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad --init {text!r}: {exc}") from exc
    return D.WalkerInit.pure(amps)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--model", default=None, help=f"built-in model: {', '.join(sorted(K.BUILTINS))}")
    src.add_argument("--model-file", default=None, help="JSON model document")
    common.add_argument("--q", type=float, default=None, help="coin population diag(q, 1-q)")
    common.add_argument("--g-t", type=float, default=None, help="entry decay (example_iii)")
    common.add_argument("--g-tau", type=float, default=None, help="intermediate decay (example_iii)")
    common.add_argument("--k", type=int, default=None, help="sub-steps (u_rule)")
    common.add_argument("--theta", type=float, default=None, help="rotation angle (u_rule)")
    common.add_argument("--init", type=_init_arg, default=None, help='walker state "m:amp,..." (default "0:1")')
    common.add_argument("--out", default="-", help="output path, '-' for stdout")

    p = argparse.ArgumentParser(prog="qorw", description="Quantized random walks on the line.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("validate", parents=[common], help="check channels and kernel normalization")
    c = sub.add_parser("classical-check", parents=[common], help="classicality criterion")
    c.add_argument("--grid", type=int, default=None)
    c.add_argument("--tol", type=float, default=1e-10)

    e = sub.add_parser("evolve", parents=[common], help="n-step position distribution")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--engine", choices=("spectral", "oracle"), default="spectral")
    e.add_argument("--all-sites", action="store_true", help="keep sites with zero probability")

    m = sub.add_parser("moments", parents=[common], help="finite-n and asymptotic moments")
    m.add_argument("--n", type=_int_list, required=True, help="comma-separated step counts")
    m.add_argument("--s", type=int, default=2, help="highest moment order")
    m.add_argument("--asymptotic", action="store_true", help="append rows with n=inf")

    d = sub.add_parser("pdf", parents=[common], help="limiting scaled-position histogram")
    d.add_argument("--preset", choices=sorted(PRESETS), default=None)
    d.add_argument("--bins", type=int, default=None)
    d.add_argument("--nodes", type=int, default=None)
    d.add_argument("--mode", choices=("quadrature", "monte_carlo"), default="quadrature")
    d.add_argument("--seed", type=int, default=None)

    s = sub.add_parser("simulate", parents=[common], help="coin-simulated asymptotic moments")
    s.add_argument("--s", type=int, default=3, help="highest moment order")

    st = sub.add_parser("stochastic", parents=[common], help="stochastic estimator convergence")
    st.add_argument("--s", type=int, default=1)
    st.add_argument("--samples", type=_int_list, default=[1000, 10_000, 100_000])
    st.add_argument("--seed", type=int, default=None)
    st.add_argument("--replicates", type=int, default=16)
    return p


def resolve_model(args) -> K.WalkModel:
    if args.model_file:
        try:
            return K.load_model(args.model_file)
        except (OSError, json.JSONDecodeError) as exc:
            raise ParseFailure(f"cannot read model file: {exc}") from exc
    name = args.model
    params = {}
    if getattr(args, "preset", None):
        name, params, _, _ = PRESETS[args.preset]
        params = dict(params)
    if name is None:
        raise ParseFailure("one of --model, --model-file or --preset is required")
    for attr, key in (("q", "q"), ("g_t", "g_t"), ("g_tau", "g_tau"), ("k", "k"), ("theta", "theta")):
        val = getattr(args, attr)
        if val is not None:
            params[key] = val
    return K.builtin(name, **params)


def kernel_residual(model: K.WalkModel, nodes: int = 64) -> float:
    phi = K.grid_angles(nodes)
    return float(np.max(np.abs(K.kernel_values(model, phi, phi) - 1.0)))


def _run(args) -> tuple[str, float, str]:
    """Execute ``args``; return (csv text or report, normalization residual, summary)."""
    model = resolve_model(args)
    init = args.init or D.WalkerInit.localized(0)
    cmd = args.command
    workers = sampling.default_workers()

    if cmd == "validate":
        lines, worst = [], 0.0
        channels = list(model.quantizers) + ([model.entry_channel] if model.entry_channel else [])
        for ch in channels:
            r = coin.validate_cptp(ch)
            worst = max(worst, r.deviation)
            lines.append(f"{ch.label}: {'pass' if r.passed else 'FAIL'} deviation={r.deviation:.3e}")
        lines.append(f"coin_init: density residuals {coin.density_residuals(model.coin_init)}")
        return "\n".join(lines) + "\n", worst, f"channels={len(channels)}"

    if cmd == "classical-check":
        res = K.classicality_test(model, args.grid, args.tol)
        verdict = "classical" if res.classical else "non-classical"
        return f"{verdict}\n", 0.0, f"{verdict} variation={res.variation:.3e}"

    if cmd == "evolve":
        if args.n < 0:
            raise ParameterError("--n must be >= 0")
        engine = D.probabilities if args.engine == "spectral" else oracle.oracle_run
        dist = engine(model, init, args.n)
        drop = None if args.all_sites else 1e-14
        text = csvio.render(csvio.DISTRIBUTION_HEADER, csvio.distribution_rows(dist, drop))
        return text, dist.normalization_residual, f"n={args.n} engine={args.engine} sites={dist.sites.size}"

    if cmd == "moments":
        if args.s < 1:
            raise ParameterError("--s must be >= 1")
        rows, resid = [], 0.0
        for n in args.n:
            resid = max(resid, D.probabilities(model, init, n).normalization_residual)
            for s in range(1, args.s + 1):
                rows.append((n, s, D.moment(model, init, n, s)))
        if args.asymptotic:
            rows += [("inf", s, D.asymptotic_moment(model, init, s)) for s in range(1, args.s + 1)]
        return csvio.render(csvio.MOMENT_HEADER, rows), resid, f"rows={len(rows)}"

    if cmd == "pdf":
        bins, nodes = args.bins, args.nodes
        if args.preset:
            _, _, pb, pn = PRESETS[args.preset]
            bins = pb if bins is None else bins
            nodes = pn if nodes is None else nodes
        bins = 200 if bins is None else bins
        nodes = 200_000 if nodes is None else nodes
        if args.mode == "monte_carlo" and args.seed is None:
            raise ParameterError("--seed is required in monte_carlo mode")
        hist = D.asymptotic_pdf(model, init, bins, nodes, args.mode, args.seed, workers)
        text = csvio.render(csvio.HISTOGRAM_HEADER, csvio.histogram_rows(hist))
        resid = abs(float(hist.masses.sum()) - 1.0)
        return text, resid, f"bins={hist.masses.size} mode={args.mode} degenerate={hist.degenerate}"

    if cmd == "simulate":
        rows = []
        for s in range(1, args.s + 1):
            sim = A.simulated_moment(A.SimulatorSpec(model, s, init))
            quad = D.asymptotic_moment(model, init, s) / model.k**s
            rows.append((s, sim, quad, abs(sim - quad)))
        worst = max(r[3] for r in rows)
        if worst > TOL.cli_residual:
            raise NumericError(f"simulated and quadrature moments differ by {worst:.3g}")
        resid = abs(float(np.real(np.trace(A.eps_bar_s(A.SimulatorSpec(model, 1, init))))) - 1.0)
        return csvio.render(csvio.SIM_MOMENT_HEADER, rows), resid, f"max_abs_diff={worst:.3e}"

    if cmd == "stochastic":
        if args.seed is None:
            raise ParameterError("--seed is required for the stochastic estimator")
        spec = A.SimulatorSpec(model, args.s, init)
        rows = A.estimator_convergence(spec, args.samples, args.seed, args.replicates, workers)
        slope = A.loglog_slope(rows) if len(rows) > 1 else float("nan")
        resid = abs(float(np.real(np.trace(A.eps_bar_s(spec)))) - 1.0)
        return csvio.render(csvio.CONVERGENCE_HEADER, rows), resid, f"loglog_slope={slope:.4f}"

    raise ParseFailure(f"unknown command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        text, norm_resid, summary = _run(args)
        model = resolve_model(args)
        k_resid = kernel_residual(model)
        print(f"qorw {args.command} [{model.label}]: {summary} "
              f"kernel_residual={k_resid:.3e} normalization_residual={norm_resid:.3e}", file=sys.stderr)
        if k_resid > TOL.cli_residual or norm_resid > TOL.cli_residual:
            print("qorw: invariant residual exceeds 1e-9", file=sys.stderr)
            return EXIT_NUMERIC
        if args.out == "-":
            sys.stdout.write(text)
        else:
            csvio.write_text_atomic(args.out, text)
        return EXIT_OK
    except ParseFailure as exc:
        print(f"qorw: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ResourceError as exc:
        print(f"qorw: resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericError as exc:
        print(f"qorw: numeric check failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, StructuralError, UsageError) as exc:
        print(f"qorw: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
