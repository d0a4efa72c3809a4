"""Command-line frontend: model emission, Bell scans, certificates, demos.

Exit codes: 0 success, 1 validation or computation failure, 2 usage error.
All JSON output carries a schema_version field and sorted keys; CSV floats
are rendered with %.12g. Setting labels in human-readable and JSON output
are 1-based (matching the way the models are usually drawn), while the
Python API stays 0-based.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import IO

import numpy as np

from . import house as house_mod
from .core import DEFAULT_TOL, ModelSpec
from .correlations import (
    TSIRELSON_BOUND,
    chained,
    chained_local_bound,
    chsh,
    chsh_max_analytic,
    chsh_max_bruteforce,
    chsh_max_over_settings,
    correlations_from_state,
    correlator,
    distill_decompose,
    ray_settings,
)
from .polygon import max_entangled, polygon
from .q1 import certificate_from_inner_product_state, q1_necessary_conditions
from .selfdual import find_cone_isomorphisms, is_strongly_self_dual

CLI_SCHEMA_VERSION = 1


def _dump_json(payload: dict, stream: IO[str]) -> None:
    payload.setdefault("schema_version", CLI_SCHEMA_VERSION)
    json.dump(payload, stream, sort_keys=True, indent=2)
    stream.write("\n")


def _parse_model(spec: str) -> ModelSpec:
    if spec == "house":
        return house_mod.house_model()
    if spec.startswith("polygon:"):
        return polygon(int(spec.split(":", 1)[1]))
    raise ValueError(f"unknown model {spec!r}; expected polygon:<n> or house")


def _csv_row(values) -> str:
    cells = []
    for v in values:
        cells.append(f"{v:.12g}" if isinstance(v, float) else str(v))
    return ",".join(cells)


def _write_fig3_csv(n_from: int, n_to: int, stream: IO[str]) -> None:
    stream.write("n,parity,S_bruteforce,S_analytic,residue_class\n")
    for n in range(n_from, n_to + 1):
        brute, _ = chsh_max_bruteforce(n)
        stream.write(_csv_row([
            n,
            "even" if n % 2 == 0 else "odd",
            float(brute),
            float(chsh_max_analytic(n)),
            n % 8,
        ]) + "\n")


def _cmd_polygon(args: argparse.Namespace) -> int:
    model = polygon(args.n)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(model.to_json(indent=2) + "\n")
        print(f"wrote {args.emit}")
    elif args.json:
        print(model.to_json(indent=2))
    else:
        ray_count = int(np.sum(model.ray_extremal))
        print(f"{model.name}: {model.n_states} states, {model.n_effects} effects "
              f"({ray_count} ray-extremal), dim {model.dim}")
    return 0


def _cmd_chsh_max(args: argparse.Namespace) -> int:
    if args.n is not None:
        n_from = n_to = args.n
    else:
        n_from, n_to = args.n_from, args.n_to
    if n_from < 3 or n_to < n_from:
        raise ValueError("need 3 <= n-from <= n-to")
    if args.json:
        rows = []
        for n in range(n_from, n_to + 1):
            brute, settings = chsh_max_bruteforce(n)
            rows.append({
                "n": n,
                "parity": "even" if n % 2 == 0 else "odd",
                "S_bruteforce": float(brute),
                "S_analytic": float(chsh_max_analytic(n)),
                "residue_class": n % 8,
                "settings": [int(s) + 1 for s in settings],
            })
        _dump_json({"rows": rows, "tsirelson": TSIRELSON_BOUND}, sys.stdout)
    elif args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            _write_fig3_csv(n_from, n_to, fh)
        print(f"wrote {args.out}")
    else:
        _write_fig3_csv(n_from, n_to, sys.stdout)
    return 0


def _cmd_fig3(args: argparse.Namespace) -> int:
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        _write_fig3_csv(args.n_from, args.n_to, fh)
    print(f"wrote {args.out}")
    return 0


def _cmd_chained(args: argparse.Namespace) -> int:
    n, big_n = args.n, args.N
    if big_n < 2:
        raise ValueError("need at least N = 2 settings")
    if n < big_n:
        raise ValueError("polygon needs at least one ray per setting")
    state = max_entangled(n)
    meas = [ray_settings(state.model_a, big_n)] * 2
    table = correlations_from_state(state, meas[0], meas[1])
    value = chained(table, big_n)
    if args.json:
        _dump_json({
            "n": n,
            "N": big_n,
            "value": value,
            "local_bound": chained_local_bound(big_n),
            "algebraic_maximum": 2 * big_n,
        }, sys.stdout)
    else:
        print(f"chained value for N={big_n} settings on the {n}-gon: "
              f"{round(value, 12)} (local bound {chained_local_bound(big_n)})")
    return 0


def _cmd_distill(args: argparse.Namespace) -> int:
    eps, p_box, p_corr = distill_decompose(args.n)
    state = max_entangled(args.n)
    table = correlations_from_state(
        state, ray_settings(state.model_a, 2), ray_settings(state.model_b, 2)
    )
    e10 = correlator(table, 1, 0)
    if args.json:
        _dump_json({
            "n": args.n,
            "eps": eps,
            "E_2_1": e10,
            "p_box": p_box.probs.tolist(),
            "p_corr": p_corr.probs.tolist(),
        }, sys.stdout)
    else:
        print(f"n={args.n}: eps = {eps:.12g}, correlator E(2,1) = {e10:.12g}")
    return 0


def _cmd_q1_cert(args: argparse.Namespace) -> int:
    model = _parse_model(args.model)
    if model.name == "house":
        state = house_mod.house_joint_state()
        meas_a, meas_b = house_mod.house_demo_measurements()
    else:
        if args.state != "maxent":
            raise ValueError(f"unknown state {args.state!r} for polygon models")
        state = max_entangled(model.n_states)
        meas_a = ray_settings(model, args.settings)
        meas_b = ray_settings(model, args.settings)

    from .bipartite import is_inner_product_state

    if is_inner_product_state(state, args.tol).is_inner_product:
        cert = certificate_from_inner_product_state(state, meas_a, meas_b, args.tol)
        payload = cert.to_dict()
        text = f"verdict: {cert.verdict(args.tol)} (min eigenvalue {cert.eigen_spectrum[0]:.3e})"
    else:
        if model.name == "house":
            table = correlations_from_state(state, meas_a, meas_b)
        else:
            _, best = chsh_max_over_settings(state)
            i0, i1, j0, j1 = best
            table = correlations_from_state(
                state,
                [ray_settings(model, model.n_states)[i] for i in (i0, i1)],
                [ray_settings(model, model.n_states)[j] for j in (j0, j1)],
            )
        report = q1_necessary_conditions(table, tol=args.tol)
        payload = {"gamma": None, "spectrum": None, **report.to_dict()}
        text = (f"verdict: {report.verdict} "
                f"(CHSH {report.chsh_value:.6g} vs {report.chsh_bound:.6g}, "
                f"quadratic {report.uffink_value:.6g} vs {report.uffink_bound:.6g})")
    if args.json:
        _dump_json(payload, sys.stdout)
    else:
        print(text)
    return 0


def _cmd_selfdual(args: argparse.Namespace) -> int:
    model = _parse_model(args.model)
    witnesses = find_cone_isomorphisms(model, args.tol)
    strong, strong_witness = is_strongly_self_dual(model, args.tol)
    if args.json:
        _dump_json({
            "model": model.name,
            "weak": bool(witnesses),
            "strong": strong,
            "witnesses": [w.tolist() for w in witnesses],
            "strong_witness": None if strong_witness is None else strong_witness.tolist(),
        }, sys.stdout)
    else:
        print(f"{model.name}: weakly self-dual: {'yes' if witnesses else 'no'} "
              f"({len(witnesses)} isomorphisms); strongly self-dual: "
              f"{'yes' if strong else 'no'}")
    return 0


def _cmd_house(args: argparse.Namespace) -> int:
    value, table = house_mod.house_uffink_demo()
    chsh_value = chsh(table)
    report = q1_necessary_conditions(table, tol=args.tol)
    if args.json:
        _dump_json({
            "uffink": value,
            "chsh": chsh_value,
            "tsirelson": TSIRELSON_BOUND,
            "verdict": report.verdict,
        }, sys.stdout)
    else:
        print(f"quadratic correlator value: {value}")
        print(f"CHSH value: {round(chsh_value, 12)} (Tsirelson {TSIRELSON_BOUND:.12g})")
        if report.verdict == "not-in-Q1":
            print("verdict: not in Q1 (quadratic bound exceeded, CHSH bound respected)")
        else:
            print(f"verdict: {report.verdict}")
    return 0


def _add_tol(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=None,
                   help=f"numeric tolerance override (default {DEFAULT_TOL:g})")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polybell",
        description="Polygon and house models, Bell functionals, certificates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("polygon", help="construct a polygon model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--emit", metavar="PATH", help="write model JSON to a file")
    p.add_argument("--json", action="store_true", help="print model JSON to stdout")
    _add_tol(p)
    p.set_defaults(func=_cmd_polygon)

    p = sub.add_parser("chsh-max", help="maximal CHSH value over all settings")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-from", type=int, default=3)
    p.add_argument("--n-to", type=int, default=52)
    p.add_argument("--out", metavar="PATH", help="write CSV here instead of stdout")
    p.add_argument("--json", action="store_true")
    _add_tol(p)
    p.set_defaults(func=_cmd_chsh_max)

    p = sub.add_parser("fig3", help="CHSH ceiling/floor CSV across polygon sizes")
    p.add_argument("--n-from", type=int, default=3)
    p.add_argument("--n-to", type=int, default=52)
    p.add_argument("--out", metavar="PATH", default="fig3.csv")
    _add_tol(p)
    p.set_defaults(func=_cmd_fig3)

    p = sub.add_parser("chained", help="chained Bell value with canonical settings")
    p.add_argument("--n", type=int, required=True, help="polygon size")
    p.add_argument("--N", type=int, required=True, help="settings per side")
    p.add_argument("--json", action="store_true")
    _add_tol(p)
    p.set_defaults(func=_cmd_chained)

    p = sub.add_parser("distill", help="split the two-setting table into box + classical parts")
    p.add_argument("--n", type=int, required=True, help="even polygon size")
    p.add_argument("--json", action="store_true")
    _add_tol(p)
    p.set_defaults(func=_cmd_distill)

    p = sub.add_parser("q1-cert", help="first-level certificate or necessary-condition screen")
    p.add_argument("--model", required=True, help="polygon:<n> or house")
    p.add_argument("--state", default="maxent")
    p.add_argument("--settings", type=int, default=2)
    p.add_argument("--json", action="store_true")
    _add_tol(p)
    p.set_defaults(func=_cmd_q1_cert)

    p = sub.add_parser("selfdual", help="weak/strong self-duality classification")
    p.add_argument("--model", required=True, help="polygon:<n> or house")
    p.add_argument("--json", action="store_true")
    _add_tol(p)
    p.set_defaults(func=_cmd_selfdual)

    p = sub.add_parser("house", help="house-model demonstrations")
    p.add_argument("action", nargs="?", default="demo", choices=["demo"])
    p.add_argument("--json", action="store_true")
    _add_tol(p)
    p.set_defaults(func=_cmd_house)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
