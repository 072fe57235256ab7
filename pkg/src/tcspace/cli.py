"""Command-line front end.

Every command reads JSON inputs from files, prints one JSON document (or a
TSV table) on stdout and exits 0. Bad input exits 2, a mathematical
obstruction exits 3; both print ``{"error": <class name>, "message": ...}``.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .direct_system import _exact_cosine, d_infinity, iota, retraction, segre
from .errors import ParseError, TCSpaceError, ValidationError
from .exact import as_fraction, format_rational
from .filtrations import FiltrationSpec, cauchy_table, filtration_l2
from .flags import (TrivialFlag, angle, apartment_from_json, flag_from_json,
                    tits_cosine, tits_triple)
from .linalg import Subspace
from .testbed import (SHIPPED, MonomialConfig, NormConvention, ToricPolarization,
                      df_classical, invariant_report, l2_norm_sq, weight_polynomials)

COMMANDS = ("df", "norm", "dist", "dinf", "cauchy", "segre", "retract", "iota", "report")


def _float(x: float) -> float:
    return float(f"{x:.10g}")


def _load(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _polytope(arg: str | None) -> ToricPolarization:
    if arg is None:
        raise ValidationError("--polytope is required")
    if arg in SHIPPED and not Path(arg).exists():
        return SHIPPED[arg]
    return ToricPolarization.from_json(_load(arg))


def _configs(args, count: int) -> list[MonomialConfig]:
    paths = args.config or []
    if len(paths) != count:
        raise ValidationError(f"expected {count} --config argument(s), got {len(paths)}")
    return [MonomialConfig.from_json(_load(p)) for p in paths]


def _one(values, name: str):
    if not values or len(values) != 1:
        raise ValidationError(f"expected exactly one --{name}")
    return values[0]


def _fit_kw(args, X: ToricPolarization) -> dict:
    need = X.dim + 3 + args.holdout
    if args.k_max < need:
        raise ValidationError(f"--k-max must be at least {need} here")
    return {"holdout": args.holdout, "k_max": args.k_max}


def _distance_json(dot, nu, nv) -> dict:
    out = {"dot": format_rational(dot), "nu": format_rational(nu), "nv": format_rational(nv),
           "radians": _float(angle(dot, nu, nv))}
    cos = _exact_cosine(dot, nu, nv)
    if cos is not None:
        out["cos"] = format_rational(cos)
    return out


def cmd_df(args):
    X = _polytope(args.polytope)
    (c,) = _configs(args, 1)
    c.check_against(X)
    polys = weight_polynomials(c, X, **_fit_kw(args, X))
    df_raw, df_norm = df_classical(c, X, NormConvention(args.norm), polys)
    return {"df_raw": format_rational(df_raw), "df_normalized": _float(df_norm),
            "l2_norm_sq": format_rational(l2_norm_sq(c, X, polys))}


def cmd_norm(args):
    X = _polytope(args.polytope)
    kw = _fit_kw(args, X)
    if args.filtration:
        F = FiltrationSpec.from_json(_load(args.filtration))
        m_max = max(args.m_list) if args.m_list else 6
        table, estimate = filtration_l2(F, X, m_max, **kw)
        rows = [[m, format_rational(v)] for m, v in table]
        if args.format == "tsv":
            return "m\tl2_norm_sq\n" + "".join(f"{m}\t{v}\n" for m, v in rows)
        return {"sequence": rows, "extrapolated": _float(estimate),
                "almost_trivial": all(v == 0 for _, v in table)}
    (c,) = _configs(args, 1)
    c.check_against(X)
    norm = l2_norm_sq(c, X, **kw)
    return {"l2_norm_sq": format_rational(norm), "almost_trivial": norm == 0}


def cmd_dist(args):
    if args.point:
        if len(args.point) != 2:
            raise ValidationError("dist needs two --point or two --flag arguments")
        p, q = (apartment_from_json(_load(x)) for x in args.point)
        return _distance_json(*tits_cosine(p, q))
    if not args.flag or len(args.flag) != 2:
        raise ValidationError("dist needs two --flag arguments")
    f, g = (flag_from_json(_load(x)) for x in args.flag)
    if f.is_trivial or g.is_trivial:
        raise ValidationError("the trivial point has no Tits distance")
    return _distance_json(*tits_triple(f, g))


def cmd_dinf(args):
    X = _polytope(args.polytope)
    a, b = _configs(args, 2)
    d = d_infinity(a, b, X, **_fit_kw(args, X))
    return d.to_json()


def cmd_cauchy(args):
    X = _polytope(args.polytope)
    if not args.filtration:
        raise ValidationError("--filtration is required")
    F = FiltrationSpec.from_json(_load(args.filtration))
    m_list = args.m_list or [1, 2, 3, 4, 5, 6]
    rows = cauchy_table(F, X, m_list, args.j, **_fit_kw(args, X))
    if args.format == "tsv":
        return "m\tcos_num\tcos_den_sq\tradians\n" + "".join(r.tsv() + "\n" for r in rows)
    return {"j": args.j, "rows": [dict(m=r.m, **r.distance.to_json()) for r in rows]}


def cmd_segre(args):
    p = apartment_from_json(_load(_one(args.point, "point")))
    return segre(p, args.k).to_json()


def _subspace(obj) -> Subspace:
    try:
        rows = obj["basis"] if isinstance(obj, dict) else obj
        vectors = [[as_fraction(x) for x in r] for r in rows]
        n = obj.get("ambient_dim") if isinstance(obj, dict) else None
        return Subspace.span(vectors, n if n is not None else len(vectors[0]))
    except (KeyError, TypeError, IndexError) as exc:
        raise ValidationError(f"bad subspace: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, TCSpaceError):
            raise
        raise ValidationError(f"bad subspace: {exc}") from exc


def cmd_retract(args):
    f = flag_from_json(_load(_one(args.flag, "flag")))
    if not args.subspace:
        raise ValidationError("--subspace is required")
    W = _subspace(_load(args.subspace))
    if W.ambient_dim != f.ambient_dim:
        raise ValidationError("subspace and flag live in different spaces")
    rho = retraction(f, W)
    out = rho.to_json()
    out["trivial"] = isinstance(rho, TrivialFlag)
    return out


def cmd_iota(args):
    X = _polytope(args.polytope)
    (c,) = _configs(args, 1)
    return iota(c, args.k, X).to_json()


def cmd_report(args):
    X = _polytope(args.polytope)
    (c,) = _configs(args, 1)
    rep = invariant_report(c, X, tuple(range(1, args.k + 1)), NormConvention(args.norm),
                           **_fit_kw(args, X))
    if args.format != "tsv":
        return rep.to_json()
    chow = dict(rep.chow_values)
    lines = ["k\th\tw\ttr2\tchow"]
    for k in range(1, args.k + 1):
        value = format_rational(chow[k]) if k in chow else "NA"
        lines.append("\t".join([str(k), format_rational(rep.h_poly(k)), format_rational(rep.w_poly(k)),
                                format_rational(rep.tr2_poly(k)), value]))
    return "\n".join(lines) + "\n"


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _m_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("m-list entries must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcspace", description="Exact test-configuration geometry on toric testbeds.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--polytope", help="polytope JSON file or shipped name (P1_O1, P1_O2, P2_O1, P1xP1_O11)")
    parser.add_argument("--config", action="append", help="monomial configuration JSON (repeat for dinf)")
    parser.add_argument("--filtration", help="filtration JSON")
    parser.add_argument("--flag", action="append", help="weighted flag JSON (repeat for dist)")
    parser.add_argument("--point", action="append", help="apartment point JSON")
    parser.add_argument("--subspace", help="subspace JSON: list of spanning vectors")
    parser.add_argument("--k", type=int, default=2, help="level multiplier (segre, iota) or last chow level (report)")
    parser.add_argument("--k-max", type=int, default=64, dest="k_max")
    parser.add_argument("--holdout", type=int, default=2)
    parser.add_argument("--norm", choices=[c.value for c in NormConvention], default="l2")
    parser.add_argument("--format", choices=["json", "tsv"], default="json")
    parser.add_argument("--j", type=int, default=2)
    parser.add_argument("--m-list", type=_m_list, dest="m_list")
    return parser


def _emit(payload, stream) -> None:
    if isinstance(payload, str):
        stream.write(payload)
    else:
        stream.write(json.dumps(payload, sort_keys=True) + "\n")


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        if args.k < 1 or args.j < 1 or args.holdout < 1:
            raise ValidationError("--k, --j and --holdout must be positive")
        payload = HANDLERS[args.command](args)
    except TCSpaceError as exc:
        _emit({"error": type(exc).__name__, "message": str(exc)}, stdout)
        return exc.exit_code
    _emit(payload, stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
