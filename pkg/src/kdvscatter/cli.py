"""Command-line front end: scatter / invert / evolve / verify.

File schemas (all JSON; complex numbers are [re, im] pairs, floats are
written with 17 significant digits in a fixed field order, so identical
inputs give byte-identical outputs):

    potential file   { "grid": {"L": ..., "n": ...},
                       "values": [...], "N": ..., "M": ... }
    scattering file  { "kgrid": {"k_max": ..., "n_k": ...},
                       "S": [[re, im], ...], "W": [[re, im], ...],
                       "r_plus": ..., "r_minus": ..., "t": ...,
                       "A": ..., "I": [...],
                       "certificate": {...} }
    report files     flat JSON of named residuals.

Exit codes: 0 success, 2 input error, 3 domain-membership failure,
4 numerical-invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from . import corpus as corpus_mod
from . import flows, oracles
from .direct import (
    action_profile,
    born_s1,
    check_generic,
    reflection_transmission,
    scattering_data,
    smoothing_part,
)
from .errors import (
    BlowUpError,
    GenericityError,
    NearSingularSystemError,
    OverlapMismatchError,
    PositivityError,
    SymmetryError,
)
from .grids import (
    ComplexField,
    Potential,
    SpatialGrid,
    SpectralGrid,
    fourier_minus,
    trapezoid,
    weighted_l2_norm,
)
from .inverse import build_chain, inverse_scattering

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_NUMERIC = 4


@dataclass
class RunConfig:
    """Numerical parameters shared by every command (desk-scale defaults)."""

    L: float = 20.0
    n: int = 2048
    k_max: float = 16.0
    n_k: int = 1024
    Y: float = 40.0
    n_y: int = 512
    dt: float = 1e-4
    t: float = 0.1
    c_plus: float = -2.0
    c: float = 0.0
    c_minus: float = 2.0
    kappa_max: float = 10.0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("L", "k_max", "Y", "dt", "kappa_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("n", "n_k"):
            v = getattr(self, name)
            if v <= 0 or v & (v - 1):
                raise ValueError(f"{name} must be a positive power of two")
        if self.n_y < 2:
            raise ValueError("n_y must be >= 2")
        if not (self.c_plus <= self.c <= self.c_minus):
            raise ValueError("need c_plus <= c <= c_minus")

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))

    def spatial_grid(self):
        return SpatialGrid(self.L, self.n)

    def spectral_grid(self):
        return SpectralGrid(self.k_max, self.n_k)


# ---------------------------------------------------------------------------
# deterministic JSON


def _format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return "null"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if not np.isfinite(v):
            raise ValueError("cannot serialize non-finite float")
        return format(float(v), ".17g")
    if isinstance(v, str):
        return json.dumps(v)
    if isinstance(v, complex):
        return _format_value([v.real, v.imag])
    if isinstance(v, dict):
        inner = ", ".join(f"{json.dumps(k)}: {_format_value(x)}" for k, x in v.items())
        return "{" + inner + "}"
    if isinstance(v, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)!r}")


def dump_json(obj, path=None):
    text = _format_value(obj) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _complex_pairs(values):
    return [[float(v.real), float(v.imag)] for v in values]


def _pairs_to_complex(pairs):
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("complex array must be a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


# ---------------------------------------------------------------------------
# file IO


def load_potential(path) -> Potential:
    with open(path) as fh:
        doc = json.load(fh)
    grid = SpatialGrid(float(doc["grid"]["L"]), int(doc["grid"]["n"]))
    return Potential(
        grid,
        np.asarray(doc["values"], dtype=float),
        sobolev_order=int(doc.get("N", 0)),
        weight_order=int(doc.get("M", 4)),
    )


def potential_doc(q: Potential, extra=None):
    doc = {
        "grid": {"L": q.grid.L, "n": q.grid.n},
        "values": [float(v) for v in q.values],
        "N": q.sobolev_order,
        "M": q.weight_order,
    }
    if extra:
        doc.update(extra)
    return doc


def load_sigma(path):
    with open(path) as fh:
        doc = json.load(fh)
    ks = SpectralGrid(float(doc["kgrid"]["k_max"]), int(doc["kgrid"]["n_k"]))
    return ComplexField(ks, _pairs_to_complex(doc["S"]))


def _certificate_doc(cert):
    return {
        "W_at_zero": cert.W_at_zero,
        "min_W_on_axis": cert.min_W_on_axis,
        "kappa_max": cert.kappa_max,
        "passed": cert.passed,
        "zero_crossing": cert.zero_crossing,
    }


# ---------------------------------------------------------------------------
# commands


def cmd_scatter(args, cfg: RunConfig):
    try:
        q = load_potential(args.potential)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cert = check_generic(q, kappa_max=cfg.kappa_max)
    if not cert.passed and not args.allow_nongeneric:
        print(
            f"genericity certificate failed (W(0) = {cert.W_at_zero:.6g}); "
            "rerun with --allow-nongeneric to write S, W anyway",
            file=sys.stderr,
        )
        return EXIT_DOMAIN
    ks = cfg.spectral_grid()
    sd = scattering_data(q, ks)
    sym = sd.conjugate_symmetry_residual()
    wsr = sd.ws_identity_residual()
    gate = cfg.tol("identity", 1e-7)
    doc = {
        "kgrid": {"k_max": ks.k_max, "n_k": ks.n_k},
        "S": _complex_pairs(sd.S),
        "W": _complex_pairs(sd.W),
    }
    if cert.passed:
        r_plus, r_minus, t = reflection_transmission(sd)
        A = smoothing_part(q, sd)
        doc["r_plus"] = _complex_pairs(r_plus.values)
        doc["r_minus"] = _complex_pairs(r_minus.values)
        doc["t"] = _complex_pairs(t.values)
        doc["A"] = _complex_pairs(A.values)
        doc["I"] = [float(v) for v in action_profile(sd)]
    else:
        for key in ("r_plus", "r_minus", "t", "A", "I"):
            doc[key] = None
    doc["certificate"] = _certificate_doc(cert)
    doc["residuals"] = {"conjugate_symmetry": sym, "ws_identity": wsr}
    if max(sym, wsr) > gate:
        print(f"invariant violation: residual {max(sym, wsr):.3e} > {gate:.1e}",
              file=sys.stderr)
        return EXIT_NUMERIC
    dump_json(doc, args.out)
    return EXIT_OK


def cmd_invert(args, cfg: RunConfig):
    try:
        sigma = load_sigma(args.scattering)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        q, diag = inverse_scattering(
            sigma, xs=cfg.spatial_grid(), c_plus=cfg.c_plus,
            c_minus=cfg.c_minus, c=cfg.c, Y=cfg.Y, n_y=cfg.n_y,
            overlap_tol=cfg.tol("overlap", 1e-3), kappa_max=cfg.kappa_max,
            return_diagnostics=True,
        )
    except (PositivityError, SymmetryError) as exc:
        print(f"sigma outside the admissible class: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (OverlapMismatchError, NearSingularSystemError, GenericityError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    dump_json(potential_doc(q, extra={"diagnostics": diag}), args.out)
    return EXIT_OK


def cmd_evolve(args, cfg: RunConfig):
    try:
        q = load_potential(args.potential)
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    t = cfg.t if args.t is None else args.t
    ks = cfg.spectral_grid()
    diag = {"method": args.method, "t": t}
    try:
        if args.method == "airy":
            out = flows.airy_flow(q, t, ks)
            h = q.grid.h
            diag["l2_before"] = float(np.sqrt(trapezoid(q.values**2, h)))
            diag["l2_after"] = float(np.sqrt(trapezoid(out.values**2, h)))
        elif args.method == "spectral":
            out = flows.kdv_flow_spectral(q, t, dt=cfg.dt)
        else:
            out = flows.kdv_flow_scattering(
                q, t, ks=ks, Y=cfg.Y, n_y=cfg.n_y,
                c_plus=cfg.c_plus, c_minus=cfg.c_minus, c=cfg.c,
                kappa_max=cfg.kappa_max,
            )
            ref = flows.kdv_flow_spectral(q, t, dt=cfg.dt)
            dist = np.sqrt(trapezoid((out.values - ref.values) ** 2, q.grid.h))
            diag["l2_distance_to_spectral"] = float(dist)
    except GenericityError as exc:
        print(f"domain failure: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (BlowUpError, OverlapMismatchError, NearSingularSystemError,
            PositivityError, SymmetryError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    dump_json(potential_doc(out, extra={"diagnostics": diag}), args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites


def _corpus_from_dir(path, cfg):
    import os

    names = sorted(f for f in os.listdir(path) if f.endswith(".json"))
    if not names:
        raise FileNotFoundError(f"no potential files in corpus directory {path!r}")
    out = []
    for name in names:
        out.append((name, load_potential(os.path.join(path, name))))
    return out


def _suite_identities(cfg, pots, checks):
    gate = cfg.tol("identity", 1e-7)
    ks = cfg.spectral_grid()
    for name, q in pots:
        sd = scattering_data(q, ks)
        checks.append((f"{name}.conjugate_symmetry",
                       sd.conjugate_symmetry_residual(), gate))
        checks.append((f"{name}.ws_identity", sd.ws_identity_residual(), gate))
        r_plus, r_minus, t = reflection_transmission(sd)
        off = ks.nodes != 0
        u1 = np.abs(t.values[off]) ** 2 + np.abs(r_plus.values[off]) ** 2
        u2 = np.abs(t.values[off]) ** 2 + np.abs(r_minus.values[off]) ** 2
        resid = max(np.max(np.abs(u1 - 1.0)), np.max(np.abs(u2 - 1.0)))
        checks.append((f"{name}.unitarity", float(resid), gate))


def _suite_unitarity(cfg, pots, checks):
    gate = cfg.tol("unitarity", 1e-7)
    ks = cfg.spectral_grid()
    for name, q in pots:
        sd = scattering_data(q, ks)
        r_plus, r_minus, t = reflection_transmission(sd)
        off = ks.nodes != 0
        u1 = np.abs(t.values[off]) ** 2 + np.abs(r_plus.values[off]) ** 2
        u2 = np.abs(t.values[off]) ** 2 + np.abs(r_minus.values[off]) ** 2
        resid = max(np.max(np.abs(u1 - 1.0)), np.max(np.abs(u2 - 1.0)))
        checks.append((f"{name}.unitarity", float(resid), gate))
        chain = build_chain(sd.s_field())
        checks.append((f"{name}.chain_unitarity", chain.unitarity_residual(), gate))


def _suite_roundtrip(cfg, pots, checks):
    gate = cfg.tol("roundtrip", 1e-3)
    ks = cfg.spectral_grid()
    xs = cfg.spatial_grid()
    for name, q in pots:
        sd = scattering_data(q, ks)
        q_rec = inverse_scattering(
            sd.s_field(), xs=xs, c_plus=cfg.c_plus, c_minus=cfg.c_minus,
            c=cfg.c, Y=cfg.Y, n_y=cfg.n_y, certify=False,
        )
        err = weighted_l2_norm(q_rec.values - q.values, xs.nodes, 0)
        checks.append((f"{name}.roundtrip_l2", float(err), gate))


def _suite_smoothing(cfg, pots, checks):
    ks = cfg.spectral_grid()
    grid = pots[0][1].grid
    base = corpus_mod.gaussian_barrier(grid, amplitude=1.0)
    ratios = []
    for eps in (0.1, 0.03, 0.01):
        qe = Potential(grid, eps * base.values)
        sd = scattering_data(qe, ks)
        A = smoothing_part(qe, sd)
        ratios.append(weighted_l2_norm(A.values, ks.nodes, 0) / eps**2)
    spread = (max(ratios) - min(ratios)) / ratios[-1]
    checks.append(("A_quadratic_scaling_spread", float(spread),
                   cfg.tol("smoothing_spread", 0.05)))
    tent = corpus_mod.tent_squared_barrier(grid)
    k_hi = min(32.0, cfg.k_max * 2)
    fit_ks = SpectralGrid(k_hi, cfg.n_k)
    sd = scattering_data(tent, fit_ks)
    A = smoothing_part(tent, sd)
    sel = (fit_ks.nodes >= 4.0) & (fit_ks.nodes <= k_hi)
    kk = fit_ks.nodes[sel]
    slope_a = np.polyfit(np.log(kk), np.log(np.abs(A.values[sel]) + 1e-300), 1)[0]
    f = fourier_minus(tent, fit_ks)
    slope_f = np.polyfit(np.log(kk), np.log(np.abs(f.values[sel]) + 1e-300), 1)[0]
    gap = slope_f - slope_a
    checks.append(("tail_slope_gap_minus_1", abs(float(gap) - 1.0),
                   cfg.tol("slope_gap", 0.25)))


def _suite_actions(cfg, pots, checks):
    ks = cfg.spectral_grid()
    for name, q in pots:
        sd = scattering_data(q, ks)
        prof = action_profile(sd)
        checks.append((f"{name}.action_oddness",
                       float(np.max(np.abs(prof + prof[::-1]))),
                       cfg.tol("action", 1e-9)))
        pos = ks.nodes > 0
        checks.append((f"{name}.action_nonnegative",
                       float(max(0.0, -np.min(prof[pos]))),
                       cfg.tol("action", 1e-12)))
        i0 = ks.zero_index
        checks.append((f"{name}.action_zero_at_origin",
                       float(abs(prof[i0])), cfg.tol("action", 1e-12)))


def _suite_flow(cfg, pots, checks):
    grid = pots[0][1].grid
    q = corpus_mod.gaussian_barrier(grid, amplitude=0.2)
    t = min(cfg.t, 0.05)
    ks = cfg.spectral_grid()
    airy = flows.airy_flow(q, t, ks)
    ref = oracles.airy_reference(q, t)
    checks.append(("airy_vs_spectral_oracle",
                   float(np.max(np.abs(airy.values - ref.values))),
                   cfg.tol("airy", 1e-8)))
    u_scat = flows.kdv_flow_scattering(q, t, ks=ks, Y=cfg.Y, n_y=cfg.n_y)
    u_spec = flows.kdv_flow_spectral(q, t, dt=cfg.dt)
    dist = np.sqrt(trapezoid((u_scat.values - u_spec.values) ** 2, grid.h))
    checks.append(("kdv_scattering_vs_spectral", float(dist),
                   cfg.tol("flow", 1e-3)))


_SUITES = {
    "identities": _suite_identities,
    "unitarity": _suite_unitarity,
    "roundtrip": _suite_roundtrip,
    "smoothing": _suite_smoothing,
    "actions": _suite_actions,
    "flow": _suite_flow,
}


def cmd_verify(args, cfg: RunConfig):
    try:
        if args.corpus:
            pots = _corpus_from_dir(args.corpus, cfg)
        else:
            pots = corpus_mod.default_corpus(cfg.spatial_grid())
    except (OSError, ValueError, KeyError, json.JSONDecodeError,
            FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    checks = []
    _SUITES[args.suite](cfg, pots, checks)
    doc = {
        "suite": args.suite,
        "checks": [
            {"name": n, "residual": r, "tolerance": tol, "passed": r <= tol}
            for n, r, tol in checks
        ],
    }
    doc["passed"] = all(c["passed"] for c in doc["checks"])
    dump_json(doc, args.out)
    return EXIT_OK if doc["passed"] else EXIT_NUMERIC


# ---------------------------------------------------------------------------


def _add_config_flags(p):
    p.add_argument("--L", type=float, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--k-max", dest="k_max", type=float, default=None)
    p.add_argument("--n-k", dest="n_k", type=int, default=None)
    p.add_argument("--Y", type=float, default=None)
    p.add_argument("--n-y", dest="n_y", type=int, default=None)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--c-plus", dest="c_plus", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--c-minus", dest="c_minus", type=float, default=None)
    p.add_argument("--kappa-max", dest="kappa_max", type=float, default=None)
    p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                   help="override a named tolerance (repeatable)")


def _config_from_args(args):
    kwargs = {}
    for f in fields(RunConfig):
        if f.name in ("tolerances", "t"):
            continue
        v = getattr(args, f.name, None)
        if v is not None:
            kwargs[f.name] = v
    tolerances = {}
    for item in getattr(args, "tol", []):
        name, _, value = item.partition("=")
        if not value:
            raise ValueError(f"malformed --tol {item!r}, expected NAME=VALUE")
        tolerances[name] = float(value)
    return RunConfig(tolerances=tolerances, **kwargs)


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="kdvscatter",
        description="Direct/inverse scattering transforms and KdV evolution "
                    "by rotation of spectral data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", help="potential file -> scattering JSON")
    p.add_argument("potential")
    p.add_argument("--out", default="-")
    p.add_argument("--allow-nongeneric", action="store_true")
    _add_config_flags(p)

    p = sub.add_parser("invert", help="scattering JSON -> potential file")
    p.add_argument("scattering")
    p.add_argument("--out", default="-")
    _add_config_flags(p)

    p = sub.add_parser("evolve", help="evolve a potential in time")
    p.add_argument("potential")
    p.add_argument("--t", type=float, default=None)
    p.add_argument("--method", choices=("scattering", "spectral", "airy"),
                   default="scattering")
    p.add_argument("--out", default="-")
    _add_config_flags(p)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(_SUITES), required=True)
    p.add_argument("--corpus", default=None,
                   help="directory of potential JSON files (default: built-in corpus)")
    p.add_argument("--out", default="-")
    _add_config_flags(p)

    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    handler = {
        "scatter": cmd_scatter,
        "invert": cmd_invert,
        "evolve": cmd_evolve,
        "verify": cmd_verify,
    }[args.command]
    return handler(args, cfg)


if __name__ == "__main__":
    sys.exit(main())
