"""Command line front end: JSON configuration in, reports out.

Three commands share one configuration document.  describe prints the
derived combinatorial data, check runs a single named decision procedure
and encodes the verdict in the exit code, scan sweeps a one-parameter
polarization family and tabulates the reports.

Exit codes: 0 verdict true, 1 verdict false, 2 inconclusive, 3
configuration error, 4 mathematical domain error.  Reports carry exact
rationals as "p/q" strings; decimal renderings are annotations.  Output
is deterministic byte for byte: no timestamps, sorted keys, fixed float
formatting.
"""

import argparse
import json
import os
import re
import sys
from fractions import Fraction as Q
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .criteria import (
    central_directions,
    check_ke,
    coercivity_report,
    log_futaki,
    scan_family,
)
from .dhintegrate import build_dh_measure, degree, integrate_dh, poly_const
from .linalg import vadd, vscale, zero_vec
from .linebundle import (
    PolarizedVariety,
    is_ample,
    make_variety,
    moment_polytope,
    variety_dimension,
)
from .restricted import (
    HorosymmetricDatum,
    classify_restricted_type,
    color_images,
    derive,
    restricted_weyl_group,
)
from .rootdata import build_involution, build_parabolic, build_root_system

EXIT_TRUE = 0
EXIT_FALSE = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG = 3
EXIT_MATH = 4


class ConfigError(ValueError):
    """Configuration problem, reported with the offending field path."""


# ---------------------------------------------------------------------------
# rational and expression parsing

_EXPR_OK = re.compile(r"^[0-9+\-*/() a-z]*$")


def _rat(value: Any, where: str) -> Q:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a rational, got a boolean")
    if isinstance(value, int):
        return Q(value)
    if isinstance(value, str):
        try:
            return Q(value)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(f"{where}: {value!r} is not a rational 'p/q' string")
    if isinstance(value, float):
        raise ConfigError(
            f"{where}: floats are not accepted; write the rational as a string"
        )
    raise ConfigError(f"{where}: expected a rational, got {type(value).__name__}")


def _rat_expr(value: Any, where: str, var: Optional[str], bound: Optional[Q]) -> Q:
    """Rational literal, or an arithmetic expression in the scan variable.

    Integer literals are wrapped in exact constructors before evaluation
    so that division never falls back to floats.
    """
    if not isinstance(value, str) or var is None or var not in value:
        return _rat(value, where)
    if bound is None:
        raise ConfigError(
            f"{where}: uses the scan variable {var!r} outside a scan"
        )
    if not _EXPR_OK.match(value):
        raise ConfigError(f"{where}: unsupported characters in expression")
    names = set(re.findall(r"[a-z]+", value))
    if names - {var}:
        raise ConfigError(f"{where}: unknown names {sorted(names - {var})}")
    wrapped = re.sub(r"(\d+)", r"_Q(\1)", value)
    try:
        out = eval(wrapped, {"__builtins__": {}}, {"_Q": Q, var: bound})
    except ZeroDivisionError:
        raise ConfigError(f"{where}: division by zero at {var} = {bound}")
    except Exception as e:
        raise ConfigError(f"{where}: bad expression {value!r}: {e}")
    return Q(out)


def _rat_list(values: Any, where: str, var=None, bound=None) -> Tuple[Q, ...]:
    if not isinstance(values, (list, tuple)):
        raise ConfigError(f"{where}: expected a list")
    return tuple(
        _rat_expr(v, f"{where}[{i}]", var, bound) for i, v in enumerate(values)
    )


def _get(cfg: Dict[str, Any], key: str, where: str) -> Any:
    if key not in cfg:
        raise ConfigError(f"{where}.{key}: missing")
    return cfg[key]


# ---------------------------------------------------------------------------
# configuration to engine objects


def build_datum(cfg: Dict[str, Any]) -> HorosymmetricDatum:
    group = _get(cfg, "group", "config")
    series = _get(group, "series", "group")
    rank = _get(group, "rank", "group")
    if not isinstance(rank, int) or rank < 1:
        raise ConfigError("group.rank: expected a positive integer")
    try:
        system = build_root_system(str(series), rank)
    except ValueError as e:
        raise ConfigError(f"group: {e}")

    inv = _get(cfg, "involution", "config")
    kind = _get(inv, "kind", "involution")
    params = inv.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("involution.params: expected an object")
    try:
        sigma = build_involution(system, str(kind), **params)
    except (ValueError, KeyError, TypeError) as e:
        raise ConfigError(f"involution: {e}")

    par = _get(cfg, "parabolic", "config")
    levi = _get(par, "levi", "parabolic")
    if not isinstance(levi, list) or not all(isinstance(i, int) for i in levi):
        raise ConfigError("parabolic.levi: expected a list of simple-root indices")
    try:
        parabolic = build_parabolic(system, levi)
    except (ValueError, IndexError) as e:
        raise ConfigError(f"parabolic: {e}")

    mode = cfg.get("normalizer_mode", "fixed-subgroup")
    try:
        return derive(system, parabolic, sigma, mode)
    except ValueError as e:
        raise ConfigError(f"derivation: {e}")


def _parse_ray(entry: Any, datum: HorosymmetricDatum, where: str) -> Tuple[Q, ...]:
    """Integer entries are coordinates in the dual-lattice basis; string
    entries are split-space coordinates directly."""
    if not isinstance(entry, (list, tuple)) or len(entry) != datum.rank:
        raise ConfigError(f"{where}: expected {datum.rank} coordinates")
    if all(isinstance(x, int) for x in entry):
        if datum.lattice_N is None:
            raise ConfigError(
                f"{where}: no dual lattice on this datum; give 'p/q' coordinates"
            )
        out = zero_vec(datum.rank)
        for c, basis_vec in zip(entry, datum.lattice_N):
            out = vadd(out, vscale(Q(c), basis_vec))
        return out
    return tuple(_rat(x, f"{where}[{i}]") for i, x in enumerate(entry))


def build_variety(
    cfg: Dict[str, Any],
    datum: HorosymmetricDatum,
    var: Optional[str] = None,
    bound: Optional[Q] = None,
) -> PolarizedVariety:
    pol = _get(cfg, "polarization", "config")
    rays_cfg = _get(pol, "rays", "polarization")
    if not isinstance(rays_cfg, list):
        raise ConfigError("polarization.rays: expected a list")
    rays = [
        _parse_ray(r, datum, f"polarization.rays[{i}]")
        for i, r in enumerate(rays_cfg)
    ]
    v_values = _rat_list(
        _get(pol, "v_values", "polarization"), "polarization.v_values", var, bound
    )
    chi = (
        _rat_list(pol["chi"], "polarization.chi", var, bound)
        if "chi" in pol
        else None
    )
    colors_cfg = pol.get("colors", {})
    if not isinstance(colors_cfg, dict):
        raise ConfigError("polarization.colors: expected an object")
    colors = {
        str(k): _rat_expr(v, f"polarization.colors[{k!r}]", var, bound)
        for k, v in colors_cfg.items()
    }
    boundary = (
        _rat_list(pol["boundary"], "polarization.boundary", var, bound)
        if "boundary" in pol
        else None
    )
    lam = (
        _rat_list(pol["lambda0"], "polarization.lambda0", var, bound)
        if "lambda0" in pol
        else None
    )
    try:
        return make_variety(
            datum,
            rays=rays,
            v_values=v_values,
            chi=chi,
            color_constants=colors,
            boundary=boundary,
            lambda0=lam,
            fiber_trivial=bool(pol.get("fiber_trivial", True)),
        )
    except ValueError as e:
        raise ConfigError(f"polarization: {e}")


# ---------------------------------------------------------------------------
# serialization

def _dec(x: Q) -> str:
    return format(float(x), ".12g")


def _ser(x: Any) -> Any:
    if isinstance(x, Q):
        return str(x)
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return format(x, ".12g")
    if isinstance(x, (list, tuple)):
        return [_ser(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _ser(v) for k, v in x.items()}
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj: Any, output: Optional[str]) -> None:
    _emit(json.dumps(_ser(obj), sort_keys=True, indent=2) + "\n", output)


# ---------------------------------------------------------------------------
# describe


def _describe_payload(datum: HorosymmetricDatum) -> Dict[str, Any]:
    classes = [
        {
            "root": c.root,
            "coroot": c.coroot_vec,
            "multiplicity": c.multiplicity,
            "ambient_members": len(c.members),
        }
        for c in datum.classes
    ]
    colors = [
        {
            "label": c.label,
            "origin": c.origin,
            "point": c.point,
            "fiber_degree": c.fiber_degree,
        }
        for c in color_images(datum)
    ]
    return {
        "series": datum.system.series,
        "ambient_rank": datum.system.rank,
        "normalizer_mode": datum.normalizer_mode,
        "restricted_type": classify_restricted_type(datum),
        "split_rank": datum.rank,
        "variety_dimension": variety_dimension(datum),
        "weyl_order": len(restricted_weyl_group(datum)),
        "restricted_classes": classes,
        "simple_restricted_roots": list(datum.simple_restricted_roots),
        "simple_restricted_coroots": list(datum.simple_restricted_coroots),
        "colors": colors,
        "central_directions": list(central_directions(datum)),
        "two_rho_H": datum.two_rho_H,
        "unipotent_roots": len(datum.phi_Qu),
        "split_positive_roots": len(datum.phi_s_plus),
    }


def _vec_str(v: Sequence[Q]) -> str:
    return "(" + ", ".join(str(x) for x in v) + ")"


def _describe_text(payload: Dict[str, Any]) -> str:
    lines: List[str] = []
    lines.append(
        f"restricted type: {payload['restricted_type']}"
        f" (split rank {payload['split_rank']})"
    )
    lines.append(f"variety dimension: {payload['variety_dimension']}")
    lines.append(f"normalizer mode: {payload['normalizer_mode']}")
    lines.append(f"restricted weyl order: {payload['weyl_order']}")
    if not payload["restricted_classes"]:
        lines.append("restricted system: empty (horospherical)")
    else:
        lines.append("restricted root classes:")
        for c in payload["restricted_classes"]:
            lines.append(
                f"  root {_vec_str(c['root'])}  coroot {_vec_str(c['coroot'])}"
                f"  multiplicity {c['multiplicity']}"
            )
        lines.append(
            "simple restricted coroots: "
            + ", ".join(_vec_str(v) for v in payload["simple_restricted_coroots"])
        )
    if payload["colors"]:
        lines.append("colors:")
        for c in payload["colors"]:
            deg = "?" if c["fiber_degree"] is None else str(c["fiber_degree"])
            lines.append(
                f"  {c['label']} ({c['origin']}) at {_vec_str(c['point'])}"
                f"  fiber degree {deg}"
            )
    if payload["central_directions"]:
        lines.append(
            "central directions: "
            + ", ".join(_vec_str(v) for v in payload["central_directions"])
        )
    else:
        lines.append("central directions: none")
    return "\n".join(lines) + "\n"


def cmd_describe(cfg: Dict[str, Any], fmt: str, output: Optional[str]) -> int:
    datum = build_datum(cfg)
    payload = _describe_payload(datum)
    if fmt == "json":
        _emit_json(payload, output)
    else:
        _emit(_describe_text(payload), output)
    return EXIT_TRUE


# ---------------------------------------------------------------------------
# check


def _coercivity_payload(rep) -> Dict[str, Any]:
    return {
        "lambda_Y": list(rep.lambda_Y),
        "s_bar_theta": {"exact": rep.s_bar_theta, "approx": _dec(rep.s_bar_theta)},
        "A": rep.A,
        "B": rep.B,
        "bar_vector": list(rep.bar_vector),
        "test_vector": list(rep.test_vector),
        "simple_root_coefficients": list(rep.simple_root_coeffs),
        "f_status": rep.f_status,
        "verdict_F_positive": rep.verdict_F_positive,
        "verdict_barycenter": rep.verdict_barycenter,
        "assumption_T": rep.assumption_T,
        "assumption_R": rep.assumption_R,
        "base_point": list(rep.base_point),
        "boundary": list(rep.boundary),
        "verdict": rep.verdict,
        "witnesses": list(rep.witnesses),
    }


def _run_check(which: str, pv: PolarizedVariety, depth: int) -> Tuple[Dict[str, Any], int]:
    if which == "ample":
        rep = is_ample(pv)
        return (
            {"verdict": rep.ample, "reasons": list(rep.reasons)},
            EXIT_TRUE if rep.ample else EXIT_FALSE,
        )
    if which == "volume":
        deg = degree(pv)
        measure = build_dh_measure(pv)
        poly = moment_polytope(pv)
        mass = integrate_dh(poly, poly_const(pv.datum.rank, Q(1)), measure)
        ok = deg > 0
        return (
            {
                "verdict": ok,
                "degree": {"exact": deg, "approx": _dec(deg)},
                "density_integral": {"exact": mass, "approx": _dec(mass)},
                "dimension": variety_dimension(pv.datum),
            },
            EXIT_TRUE if ok else EXIT_FALSE,
        )
    if which == "coercivity":
        rep = coercivity_report(pv, depth)
        payload = _coercivity_payload(rep)
        if rep.verdict:
            return payload, EXIT_TRUE
        if rep.f_status == "inconclusive":
            return payload, EXIT_INCONCLUSIVE
        return payload, EXIT_FALSE
    if which == "ke":
        rep = check_ke(pv)
        payload = {
            "verdict": rep.verdict,
            "bar_vector": list(rep.bar_vector),
            "test_vector": list(rep.test_vector),
            "simple_root_coefficients": list(rep.chamber.coefficients),
            "assumption_T": rep.assumption_T,
            "assumption_R": rep.assumption_R,
        }
        return payload, EXIT_TRUE if rep.verdict else EXIT_FALSE
    if which == "futaki":
        dirs = central_directions(pv.datum)
        values = [log_futaki(pv, b) for b in dirs]
        ok = all(v == 0 for v in values)
        payload = {
            "verdict": ok,
            "central_directions": [list(b) for b in dirs],
            "values": values,
        }
        if not dirs:
            payload["note"] = "no central directions; the obstruction is empty"
        return payload, EXIT_TRUE if ok else EXIT_FALSE
    raise ConfigError(f"unknown check: {which!r}")


def cmd_check(
    cfg: Dict[str, Any],
    which: str,
    fmt: str,
    output: Optional[str],
    settings: Dict[str, Any],
) -> int:
    datum = build_datum(cfg)
    pv = build_variety(cfg, datum)
    depth = settings.get("depth", 6)
    try:
        payload, code = _run_check(which, pv, depth)
    except (ValueError, NotImplementedError, ZeroDivisionError) as e:
        _emit_json({"which": which, "error": str(e), "exit_code": EXIT_MATH}, output)
        return EXIT_MATH
    report = {
        "which": which,
        "exit_code": code,
        "settings": settings,
        "report": payload,
    }
    if fmt == "text":
        verdict = payload.get("verdict")
        word = {True: "true", False: "false", None: "inconclusive"}[
            verdict if code != EXIT_INCONCLUSIVE else None
        ]
        _emit(f"{which}: {word}\n", output)
    else:
        _emit_json(report, output)
    return code


# ---------------------------------------------------------------------------
# scan


def cmd_scan(
    cfg: Dict[str, Any],
    fmt: str,
    output: Optional[str],
    settings: Dict[str, Any],
) -> int:
    scan = cfg.get("scan")
    if not isinstance(scan, dict):
        raise ConfigError("scan: block missing")
    var = str(scan.get("variable", "b"))
    if not re.fullmatch(r"[a-z]+", var):
        raise ConfigError("scan.variable: expected a lowercase name")
    start = _rat(_get(scan, "start", "scan"), "scan.start")
    stop = _rat(_get(scan, "stop", "scan"), "scan.stop")
    step = _rat(_get(scan, "step", "scan"), "scan.step")
    datum = build_datum(cfg)
    # validate the family once at the midpoint so config errors are not
    # silently converted to per-row error strings
    build_variety(cfg, datum, var, (start + stop) / 2)

    def family(b: Q) -> PolarizedVariety:
        return build_variety(cfg, datum, var, b)

    result = scan_family(family, start, stop, step, depth=settings.get("depth", 6))

    nrays = len(cfg["polarization"]["rays"])
    r = datum.rank
    if fmt == "json":
        rows = []
        for row in result.rows:
            if row.report is None:
                rows.append({"param": row.param, "error": row.error})
            else:
                rows.append(
                    {"param": row.param, "report": _coercivity_payload(row.report)}
                )
        _emit_json(
            {
                "settings": settings,
                "rows": rows,
                "brackets": [list(b) for b in result.brackets],
            },
            output,
        )
        return EXIT_TRUE

    header = (
        [var]
        + [f"lambda_{i}" for i in range(nrays)]
        + ["s_bar_theta", "A", "B"]
        + [f"bar_{j}" for j in range(r)]
        + [f"w_{j}" for j in range(r)]
        + ["f_status", "verdict_barycenter", "verdict", "error"]
    )
    lines = [",".join(header)]
    for row in result.rows:
        if row.report is None:
            cells = [str(row.param)] + [""] * (len(header) - 2) + [row.error or ""]
        else:
            rep = row.report
            cells = (
                [str(row.param)]
                + [str(x) for x in rep.lambda_Y]
                + [str(rep.s_bar_theta), str(rep.A), str(rep.B)]
                + [str(x) for x in rep.bar_vector]
                + [str(x) for x in rep.test_vector]
                + [
                    rep.f_status,
                    str(rep.verdict_barycenter).lower(),
                    str(rep.verdict).lower(),
                    "",
                ]
            )
        lines.append(",".join(cells))
    for a, b in result.brackets:
        lines.append(f"# verdict transition within ({a}, {b}]")
    _emit("\n".join(lines) + "\n", output)
    return EXIT_TRUE


# ---------------------------------------------------------------------------
# entry point


def _settings(cfg: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    numeric = cfg.get("numeric", {})
    if not isinstance(numeric, dict):
        raise ConfigError("numeric: expected an object")

    def pick(flag: Any, env: str, key: str, default: Any) -> Any:
        if flag is not None:
            return flag
        if env in os.environ:
            try:
                return int(os.environ[env])
            except ValueError:
                raise ConfigError(f"{env}: expected an integer")
        return numeric.get(key, default)

    threads = pick(args.threads, "HOROKIT_THREADS", "threads", 1)
    order = pick(args.quadrature_order, "HOROKIT_QUADRATURE_ORDER", "quadrature_order", 8)
    depth = pick(None, "HOROKIT_DEPTH", "depth", 6)
    if not isinstance(threads, int) or threads < 1:
        raise ConfigError("numeric.threads: expected a positive integer")
    if not isinstance(order, int) or order < 2:
        raise ConfigError("numeric.quadrature_order: expected an integer >= 2")
    if not isinstance(depth, int) or depth < 0:
        raise ConfigError("numeric.depth: expected a nonnegative integer")
    return {"threads": threads, "quadrature_order": order, "depth": depth}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="horokit",
        description="exact verdicts for polarized horosymmetric varieties",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True, help="path to the JSON configuration")
        p.add_argument("--output", default=None, help="write the report here")
        p.add_argument("--format", default=None, choices=["json", "csv", "text"])
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--quadrature-order", type=int, default=None)

    p_desc = sub.add_parser("describe", help="print the derived combinatorial data")
    common(p_desc)
    p_check = sub.add_parser("check", help="run one decision procedure")
    common(p_check)
    p_check.add_argument(
        "--which",
        required=True,
        choices=["ample", "volume", "coercivity", "ke", "futaki"],
    )
    p_scan = sub.add_parser("scan", help="sweep a one-parameter family")
    common(p_scan)

    args = parser.parse_args(argv)

    try:
        with open(args.config) as f:
            cfg = json.load(f)
    except OSError as e:
        sys.stderr.write(f"config: {e}\n")
        return EXIT_CONFIG
    except json.JSONDecodeError as e:
        sys.stderr.write(f"config: line {e.lineno}, column {e.colno}: {e.msg}\n")
        return EXIT_CONFIG
    if not isinstance(cfg, dict):
        sys.stderr.write("config: the top level must be an object\n")
        return EXIT_CONFIG

    fmt_env = os.environ.get("HOROKIT_FORMAT")
    default_fmt = {"describe": "text", "check": "json", "scan": "csv"}[args.command]
    fmt = args.format or fmt_env or default_fmt

    try:
        settings = _settings(cfg, args)
        if args.command == "describe":
            return cmd_describe(cfg, fmt, args.output)
        if args.command == "check":
            return cmd_check(cfg, args.which, fmt, args.output, settings)
        return cmd_scan(cfg, fmt, args.output, settings)
    except ConfigError as e:
        sys.stderr.write(f"config: {e}\n")
        return EXIT_CONFIG
    except (ValueError, NotImplementedError, ZeroDivisionError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_MATH


if __name__ == "__main__":
    sys.exit(main())
