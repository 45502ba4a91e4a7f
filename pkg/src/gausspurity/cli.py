"""Command-line interface.

Each ``cmd_*`` function is a thin orchestration over library calls that
returns a report dict; :func:`main` parses arguments, renders the report and
maps errors to exit codes (0 ok, 1 validation, 2 numerical, 3 verify FAIL).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .core import (GaussianParams, amplitude_to_quadrature,
                   params_from_amplitude_cm, params_from_quadrature_cm,
                   purity_single, quadrature_to_amplitude,
                   validate_physicality, wigner)
from .documents import (CMDocument, Kind, dump_cm, load_cm, load_config,
                        save_cm, write_ensemble)
from .errors import (CorrelatedPairNotSupported, GaussPurityError,
                     ModeMismatch, NumericalError, UnsupportedKind,
                     ValidationError)
from .homodyne import (estimate_cm_pq, estimate_cm_xy, sample_ensemble)
from .multimode import (TwoModeGaussianParams, purity_two_mode_pq, purity_xy,
                        two_mode_cm_from_xy, two_mode_params_from_xy_cm,
                        two_mode_wigner, xy_cm_from_pq_cm,
                        xy_cm_from_two_mode_params)
from .oracle import (GridSpec, Method, default_threads,
                     purity_integral_single, purity_integral_two_mode)

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_FAIL = 0, 1, 2, 3

LAW_ROOT = "1/sqrt(det)"
LAW_NO_ROOT = "1/det"
LAW_PRODUCT = "product law"


def cmd_purity(doc: CMDocument) -> dict:
    """Purity with the determinant law that belongs to the document kind."""
    obj = doc.to_object()
    report = {"command": "purity", "kind": doc.kind.value}
    if doc.modes is not None:
        report["modes"] = list(doc.modes)
    if doc.kind in (Kind.QUADRATURE, Kind.AMPLITUDE):
        report.update(law=LAW_ROOT, det=obj.det, purity=purity_single(obj))
    elif doc.kind is Kind.XY_PAIR:
        report.update(law=LAW_NO_ROOT, det=obj.det, purity=purity_xy(obj))
    else:
        try:
            value = purity_two_mode_pq(obj)
        except CorrelatedPairNotSupported as exc:
            raise CorrelatedPairNotSupported(
                f"{exc} Hint: `convert --to XY_PAIR` gives the X/Y description "
                "of this pair.") from None
        report.update(law=LAW_PRODUCT, det=float(np.linalg.det(obj.matrix)),
                      factors=[purity_single(obj.block_1), purity_single(obj.block_2)],
                      purity=value)
    return report


def _single_expression(p) -> str:
    return (f"W(x, y) = (2/pi) * {math.sqrt(p.gram):.17g} * exp(-({p.a:.17g}*dx^2 "
            f"+ {p.b:.17g}*dy^2 - 2*{p.c:.17g}*dx*dy))")


def _pair_expression(p) -> str:
    return (f"W(x, y) = (4/pi^2) * {p.gram:.17g} * exp(-{p.a:.17g}*|dx|^2 - {p.b:.17g}*|dy|^2 "
            f"+ {p.c:.17g}*(dx*conj(dy) + conj(dx)*dy))")


def _single_params_report(p: GaussianParams) -> dict:
    phys = validate_physicality(p)
    return {"a": p.a, "b": p.b, "c": p.c, "purity": phys.purity,
            "normalizable": phys.normalizable, "physical": phys.physical,
            "wigner": _single_expression(p)}


def reconstruct_params(doc: CMDocument):
    """Wigner parameters for a document (tuple of two for an uncorrelated P/Q pair)."""
    obj = doc.to_object()
    if doc.kind is Kind.QUADRATURE:
        return params_from_quadrature_cm(obj)
    if doc.kind is Kind.AMPLITUDE:
        return params_from_amplitude_cm(obj)
    if doc.kind is Kind.XY_PAIR:
        return two_mode_params_from_xy_cm(obj)
    if np.any(obj.cross != 0):
        raise UnsupportedKind(
            "TWO_MODE_PQ with a nonzero cross block has no P/Q-basis reconstruction; "
            "convert it to XY_PAIR first")
    return (params_from_quadrature_cm(obj.block_1), params_from_quadrature_cm(obj.block_2))


def cmd_reconstruct(doc: CMDocument) -> dict:
    params = reconstruct_params(doc)
    report = {"command": "reconstruct", "kind": doc.kind.value}
    if doc.kind in (Kind.QUADRATURE, Kind.AMPLITUDE):
        report.update(law=LAW_ROOT, **_single_params_report(params))
    elif doc.kind is Kind.XY_PAIR:
        report.update(law=LAW_NO_ROOT, a=params.a, b=params.b, c=params.c,
                      purity=params.gram, normalizable=params.is_normalizable,
                      physical=params.is_physical, wigner=_pair_expression(params))
    else:
        report.update(law=LAW_PRODUCT, modes=list(doc.modes),
                      blocks=[_single_params_report(p) for p in params],
                      purity=math.sqrt(params[0].gram) * math.sqrt(params[1].gram))
    return report


def wigner_slice(doc: CMDocument, half_width: float = 4.0, points: int = 81) -> np.ndarray:
    """Rows ``(u, v, W)`` on a square grid; for pairs ``u = Re x``, ``v = Re y``, Im parts 0."""
    params = reconstruct_params(doc)
    if isinstance(params, tuple):
        raise UnsupportedKind("Wigner slices are available for single CMs and XY pairs only")
    axis = np.linspace(-half_width, half_width, points)
    u, v = np.meshgrid(axis, axis, indexing="ij")
    if isinstance(params, TwoModeGaussianParams):
        w = two_mode_wigner(params, u, 0.0, v, 0.0)
    else:
        w = wigner(params, u, v)
    return np.column_stack([u.ravel(), v.ravel(), w.ravel()])


def cmd_convert(doc: CMDocument, to: Kind) -> CMDocument:
    to = Kind(to)
    obj = doc.to_object()
    prov = dict(doc.provenance)
    prov["text"] = (prov.get("text", "") + f" [converted from {doc.kind.value}]").strip()
    if to is doc.kind:
        return doc
    if doc.kind is Kind.QUADRATURE and to is Kind.AMPLITUDE:
        return CMDocument.from_object(quadrature_to_amplitude(obj), doc.modes, prov)
    if doc.kind is Kind.AMPLITUDE and to is Kind.QUADRATURE:
        return CMDocument.from_object(amplitude_to_quadrature(obj), doc.modes, prov)
    if doc.kind is Kind.XY_PAIR and to is Kind.TWO_MODE_PQ:
        return CMDocument.from_object(two_mode_cm_from_xy(obj), provenance=prov)
    if doc.kind is Kind.TWO_MODE_PQ and to is Kind.XY_PAIR:
        if not obj.is_opposite_pair:
            raise ModeMismatch(f"bins {obj.modes} are not a +/-Omega pair")
        return CMDocument.from_object(xy_cm_from_pq_cm(obj.matrix, obj.modes[0]), provenance=prov)
    raise UnsupportedKind(f"no conversion from {doc.kind.value} to {to.value}")


def cmd_simulate(config_path, out_dir, seed=None, n_samples=None,
                 ensemble_format="csv", threads=1) -> dict:
    cfg = load_config(config_path)
    if seed is not None or n_samples is not None:
        cfg = type(cfg)(cfg.pair_params, cfg.solo_params,
                        cfg.seed if seed is None else seed,
                        cfg.n_samples if n_samples is None else n_samples)
    ens = sample_ensemble(cfg, threads=threads)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table = write_ensemble(ens, out / f"ensemble.{ensemble_format}", ensemble_format)
    written = []
    base_prov = {"ensemble_digest": ens.digest, "seed": ens.seed, "n_samples": ens.n_samples}
    for omega in sorted(cfg.solo_params):
        est = estimate_cm_pq(ens, omega)
        doc = CMDocument.from_object(
            est.cm, (omega, omega),
            {**base_prov, "text": f"simulated resonator detection, bin {omega}",
             "stderr": est.stderr})
        path = out / f"bin_{omega}.cm.json"
        save_cm(doc, path)
        written.append(str(path))
    for omega in sorted(cfg.pair_params):
        est = estimate_cm_xy(ens, omega)
        doc = CMDocument.from_object(
            est.cm, (omega, -omega),
            {**base_prov, "text": f"simulated broadband homodyne, pair +/-{omega}",
             "stderr": est.stderr})
        path = out / f"pair_{omega}.cm.json"
        save_cm(doc, path)
        written.append(str(path))
    return {"command": "simulate", "seed": ens.seed, "n_samples": ens.n_samples,
            "digest": ens.digest, "ensemble": str(table), "documents": written}


def _parse_target(target: str, two_mode: bool):
    path = Path(target)
    if path.exists():
        doc = load_cm(path)
        return reconstruct_params(doc), doc.kind.value
    try:
        a, b, c = (float(v) for v in target.split(","))
    except ValueError:
        raise ValidationError(f"{target!r} is neither a CM file nor 'a,b,c'") from None
    if two_mode:
        return TwoModeGaussianParams(a, b, c), "params (two-mode)"
    return GaussianParams(a, b, c), "params (single-mode)"


def cmd_verify(target: str, two_mode: bool = False, grid: GridSpec | None = None,
               tolerance: float | None = None, threads: int | None = None,
               deterministic: bool = True) -> dict:
    """Closed-form purity against the brute-force oracle."""
    params, source = _parse_target(target, two_mode)
    mc = grid is not None and grid.method is Method.MONTE_CARLO
    results = []
    if isinstance(params, tuple):
        law = LAW_PRODUCT
        closed = math.sqrt(params[0].gram) * math.sqrt(params[1].gram)
        for p in params:
            results.append(purity_integral_single(
                p, grid, threads=threads, deterministic=deterministic))
        oracle_value = results[0].value * results[1].value
        default_tol = 2e-6
    elif isinstance(params, TwoModeGaussianParams):
        law = LAW_NO_ROOT
        closed = purity_xy(xy_cm_from_two_mode_params(params))
        results.append(purity_integral_two_mode(
            params, grid if grid is not None else GridSpec.two_mode(),
            threads=threads, deterministic=deterministic))
        oracle_value = results[0].value
        default_tol = 1e-3
    else:
        law = LAW_ROOT
        closed = purity_single(params)
        results.append(purity_integral_single(
            params, grid, threads=threads, deterministic=deterministic))
        oracle_value = results[0].value
        default_tol = 1e-6
    stderr = None
    if mc:
        if len(results) == 2:
            (v1, s1), (v2, s2) = ((r.value, r.stderr) for r in results)
            stderr = math.hypot(v2 * s1, v1 * s2)
        else:
            stderr = results[0].stderr
        default_tol = 3.0 * stderr
    tol = default_tol if tolerance is None else tolerance
    diff = abs(closed - oracle_value)
    return {
        "command": "verify", "source": source, "law": law,
        "closed_form": closed, "oracle": oracle_value, "oracle_stderr": stderr,
        "abs_diff": diff, "tolerance": tol,
        "method": results[0].method.value, "evaluations": sum(r.evaluations for r in results),
        "vacuum_self_test": [{"value": r.self_test.value, "tolerance": r.self_test.tolerance,
                              "passed": r.self_test.passed} for r in results],
        "verdict": "PASS" if diff <= tol else "FAIL",
    }


def render(report: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, default=str)
    lines = []
    for key, value in report.items():
        if isinstance(value, float):
            value = repr(value)
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            lines.append(f"{key}:")
            for i, item in enumerate(value):
                body = ", ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}"
                                 for k, v in item.items())
                lines.append(f"  [{i}] {body}")
            continue
        lines.append(f"{key}: {value}")
    return "\n".join(lines)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gausspurity",
                description="Gaussian-state covariance matrices, reconstruction and purity.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--format", choices=["text", "json"], default="text",
                        help="report format")
        return sp

    sp = common(sub.add_parser("purity", help="purity of a CM document"))
    sp.add_argument("cm_file")

    sp = common(sub.add_parser("reconstruct", help="Wigner parameters from a CM document"))
    sp.add_argument("cm_file")
    sp.add_argument("--slice", metavar="CSV",
                    help="also write a delimited Wigner-function slice (u,v,W)")
    sp.add_argument("--slice-half-width", type=float, default=4.0)
    sp.add_argument("--slice-points", type=int, default=81)

    sp = common(sub.add_parser("convert", help="convert a CM document to another basis"))
    sp.add_argument("cm_file")
    sp.add_argument("--to", required=True, choices=[k.value for k in Kind])
    sp.add_argument("-o", "--output", help="output file (default: stdout)")

    sp = common(sub.add_parser("simulate", help="simulate homodyne measurements"))
    sp.add_argument("config")
    sp.add_argument("-o", "--output", required=True, help="output directory")
    sp.add_argument("--seed", type=int, help="override the config seed")
    sp.add_argument("--samples", type=int, help="override n_samples")
    sp.add_argument("--ensemble-format", choices=["csv", "npz"], default="csv")
    sp.add_argument("--threads", type=int, default=None)

    sp = common(sub.add_parser("verify", help="check a purity law against the oracle"))
    sp.add_argument("target", help="CM document or 'a,b,c'")
    sp.add_argument("--two-mode", action="store_true",
                    help="interpret 'a,b,c' as +/-Omega pair parameters")
    sp.add_argument("--grid", type=int, metavar="N", help="points per axis (odd)")
    sp.add_argument("--half-width", type=float, default=8.0, help="grid extent in sigmas")
    sp.add_argument("--mc", type=int, metavar="SAMPLES", help="use Monte Carlo with SAMPLES")
    sp.add_argument("--budget", type=int, default=100_000_000, help="max tensor-grid points")
    sp.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    sp.add_argument("--tolerance", type=float)
    sp.add_argument("--threads", type=int, default=None)
    sp.add_argument("--deterministic", action="store_true",
                    help="combine partial sums in a fixed order")
    return p


def _grid_from_args(args) -> GridSpec | None:
    kw = {"half_width_sigmas": args.half_width, "budget": args.budget, "seed": args.seed}
    if args.mc is not None:
        kw.update(method=Method.MONTE_CARLO, mc_samples=args.mc)
    if args.grid is not None:
        kw["points_per_axis"] = args.grid
    elif args.two_mode or _is_pair_file(args.target):
        return GridSpec.two_mode(**kw)
    return GridSpec(**kw)


def _is_pair_file(target):
    path = Path(target)
    return path.exists() and load_cm(path).kind is Kind.XY_PAIR


def run(args) -> tuple[int, str]:
    if args.command == "purity":
        return EXIT_OK, render(cmd_purity(load_cm(args.cm_file)), args.format)
    if args.command == "reconstruct":
        doc = load_cm(args.cm_file)
        report = cmd_reconstruct(doc)
        if args.slice:
            rows = wigner_slice(doc, args.slice_half_width, args.slice_points)
            np.savetxt(args.slice, rows, fmt="%.17g", delimiter=",", header="u,v,W", comments="")
            report["slice"] = args.slice
        return EXIT_OK, render(report, args.format)
    if args.command == "convert":
        out = cmd_convert(load_cm(args.cm_file), Kind(args.to))
        if args.output:
            save_cm(out, args.output)
            return EXIT_OK, render({"command": "convert", "kind": out.kind.value,
                                    "output": args.output}, args.format)
        return EXIT_OK, dump_cm(out).rstrip("\n")
    if args.command == "simulate":
        threads = default_threads() if args.threads is None else args.threads
        report = cmd_simulate(args.config, args.output, args.seed, args.samples,
                              args.ensemble_format, threads)
        return EXIT_OK, render(report, args.format)
    if args.command == "verify":
        try:
            grid = _grid_from_args(args)
        except ValueError as exc:
            raise ValidationError(str(exc)) from None
        report = cmd_verify(args.target, args.two_mode, grid, args.tolerance,
                            args.threads, args.deterministic)
        code = EXIT_OK if report["verdict"] == "PASS" else EXIT_FAIL
        return code, render(report, args.format)
    raise AssertionError(args.command)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        code, text = run(args)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GaussPurityError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
