"""Command-line driver: ``transbend build | infbend | bend | sweep``.

Exit codes: 0 success, 1 a verification failed, 2 bad input (spec, file or
degenerate surface), 3 hypothesis violation, 4 bending parameter out of range.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import bend, cone, infbend, verify
from .curves import CurveSpec, sample_curve
from .errors import (BasisConstructionError, HypothesisError, InvalidSpecError,
                     ParameterRangeError, TransbendError)
from .surface import (assemble_surface, export_obj, fmt, fundamental_forms,
                      to_quad_mesh, write_forms_csv)

log = logging.getLogger("transbend")

EXIT_OK, EXIT_FAILED, EXIT_SPEC, EXIT_HYPOTHESIS, EXIT_RANGE = 0, 1, 2, 3, 4

INFBEND_KINDS = ("universal", "perp-planes", "cone", "two-slope", "planar-normal")
SWEEP_KINDS = ("bianchi", "koko")
DEFAULT_SAMPLES = 5
DEFAULT_STEPS = 20
SWEEP_MARGIN = 0.01


@dataclass
class RunConfig:
    command: str
    path: dict
    profile: dict
    kind: str | None = None
    t: float | None = None
    t_min: float | None = None
    t_max: float | None = None
    t_steps: int = DEFAULT_STEPS
    t_cap: float = bend.DEFAULT_T_MAX
    signs: list | None = None
    profile_signs: list | None = None
    constants: list | None = None
    tol: dict = field(default_factory=dict)
    output_dir: Path = Path(".")


def _read_json(path, what):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InvalidSpecError(f"{what}: file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise InvalidSpecError(f"{what}: invalid JSON in {path}: {exc}") from None


def _curve_entry(value, what, base_dir):
    if isinstance(value, dict):
        return value
    if isinstance(value, str):
        p = Path(value)
        return _read_json(p if p.is_absolute() else base_dir / p, what)
    raise InvalidSpecError(f"{what}: expected a curve spec object or a file name")


def _parse_list(text, what, cast=float):
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).replace(",", " ").split() if s]
    try:
        values = [float(s) for s in items]
    except (TypeError, ValueError):
        raise InvalidSpecError(f"{what}: expected a comma-separated list of numbers") from None
    if cast is int:
        if any(v not in (1.0, -1.0) for v in values):
            raise InvalidSpecError(f"{what}: every entry must be +1 or -1")
        return [int(v) for v in values]
    return values


def _parse_tol(value):
    if value is None:
        return {}
    if isinstance(value, dict):
        return {str(k): float(v) for k, v in value.items()}
    try:
        return {"check": float(value)}
    except ValueError:
        raise InvalidSpecError("tol: expected a number") from None


def build_config(args):
    """Merge the optional JSON config file with command-line flags (flags win)."""
    data, base_dir = {}, Path(".")
    if args.config:
        data = _read_json(args.config, "config")
        if not isinstance(data, dict):
            raise InvalidSpecError("config: expected a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        base_dir = Path(args.config).parent
    flags = {k: v for k, v in vars(args).items() if v is not None}
    path = flags.get("path") or data.get("path")
    profile = flags.get("profile") or data.get("profile")
    if path is None or profile is None:
        raise InvalidSpecError("path/profile: both curve specs are required")
    path_spec = _curve_entry(path, "path", Path(".") if "path" in flags else base_dir)
    profile_spec = _curve_entry(profile, "profile", Path(".") if "profile" in flags else base_dir)

    def pick(key):
        return flags.get(key, data.get(key))

    out = flags.get("out") or os.environ.get("TRANSBEND_OUT") or data.get("output_dir") or "."
    steps = pick("t_steps")
    cfg = RunConfig(
        command=args.command,
        path=path_spec,
        profile=profile_spec,
        kind=pick("kind"),
        t=None if pick("t") is None else float(pick("t")),
        t_min=None if pick("t_min") is None else float(pick("t_min")),
        t_max=None if pick("t_max") is None else float(pick("t_max")),
        t_steps=DEFAULT_STEPS if steps is None else int(steps),
        t_cap=float(pick("t_cap") or bend.DEFAULT_T_MAX),
        signs=_parse_list(pick("signs"), "signs", int),
        profile_signs=_parse_list(pick("profile_signs"), "profile-signs", int),
        constants=_parse_list(pick("constants"), "constants"),
        tol=_parse_tol(pick("tol")),
        output_dir=Path(out),
    )
    if cfg.t_steps < 1:
        raise InvalidSpecError("t-steps: must be at least 1")
    return cfg


def load_curve(spec, what):
    if not isinstance(spec, dict):
        raise InvalidSpecError(f"{what}: expected a JSON object")
    try:
        curve_spec = CurveSpec.from_dict(spec)
    except InvalidSpecError as exc:
        raise InvalidSpecError(f"{what}.{exc}") from None
    n = spec.get("samples_per_piece", DEFAULT_SAMPLES)
    if not isinstance(n, int) or isinstance(n, bool):
        raise InvalidSpecError(f"{what}.samples_per_piece: expected an integer")
    try:
        return sample_curve(curve_spec, n)
    except InvalidSpecError as exc:
        raise InvalidSpecError(f"{what}.{exc}") from None


def load_surface(cfg):
    return assemble_surface(load_curve(cfg.path, "path"), load_curve(cfg.profile, "profile"))


def _output_dir(cfg):
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return cfg.output_dir


def cmd_build(cfg):
    surface = load_surface(cfg)
    out = _output_dir(cfg)
    export_obj(to_quad_mesh(surface), out / "surface.obj")
    write_forms_csv(surface, fundamental_forms(surface), out / "forms.csv")
    print(f"wrote {out / 'surface.obj'} and {out / 'forms.csv'}")
    return EXIT_OK


def _cone_basis(surface, tol):
    dirs = np.vstack([surface.path.side_tangents, surface.profile.side_tangents])
    fitted = cone.fit_cone(dirs)
    if fitted.tag == cone.OTHER:
        raise HypothesisError(f"tangents are not on an elliptic cone or a pair of planes "
                              f"(fit residual {fitted.residual:.3e})")
    try:
        return cone.mirror_basis(fitted, tol)
    except BasisConstructionError as exc:
        raise HypothesisError(f"tangents are not on a quadric cone: {exc}") from None


def make_velocity(surface, kind, cfg):
    hyp_tol = cfg.tol.get("hypothesis", infbend.HYPOTHESIS_TOL)
    if kind == "universal":
        return infbend.universal_infinitesimal(surface)
    if kind == "perp-planes":
        return infbend.perp_planes_infinitesimal(surface, tol=hyp_tol)
    if kind == "cone":
        return infbend.cone_infinitesimal(surface, _cone_basis(surface, hyp_tol), tol=hyp_tol)
    if kind == "two-slope":
        return infbend.two_slope_infinitesimal(surface, tol=hyp_tol)
    if kind == "planar-normal":
        _, pieces = infbend.parallel_pieces(surface, hyp_tol)
        constants = cfg.constants if cfg.constants is not None else [1.0] * len(pieces)
        return infbend.planar_normal_infinitesimal(surface, constants, tol=hyp_tol)
    raise InvalidSpecError(f"kind: expected one of {INFBEND_KINDS}, got {kind!r}")


def _write_velocity_csv(surface, vel, path):
    us, vs = surface.path.side_params, surface.profile.side_params
    vals = vel.values[np.ix_(surface.path.side_index, surface.profile.side_index)]
    head = ["u", "v"] + [f"{n}_{c}" for n in ("xdot", "xdot_u", "xdot_v") for c in "xyz"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(head)
        for i, u in enumerate(us):
            for j, v in enumerate(vs):
                row = [u, v, *vals[i, j], *vel.du[i, j], *vel.dv[i, j]]
                writer.writerow([fmt(x) for x in row])


def infbend_report(surface, vel, tol):
    strain = verify.strain_residual(surface, vel, tol=tol.get("strain", verify.ANALYTIC_TOL))
    rows = [strain.row()]
    rate_tol = tol.get("rates", 1e-8)
    rot = infbend.rotation_field(surface, vel)
    rates = verify.second_form_rates(surface, vel, rot)
    target_f = np.zeros_like(rates.fdot)
    if vel.kind == "universal":
        cross = np.cross(surface.xu, surface.xv)
        target_f = np.linalg.norm(cross, axis=-1)
    checks = [("fdot", rates.fdot - target_f)]
    if vel.kind == "universal":
        checks = [("edot", rates.edot)] + checks + [("gdot", rates.gdot)]
    for name, arr in checks:
        err = np.abs(arr)
        i, j = np.unravel_index(np.argmax(err), err.shape)
        rows.append((f"rate_{name}", float(err.max()), surface.path.side_params[i],
                     surface.profile.side_params[j], rate_tol, bool(err.max() <= rate_tol)))
    mixed = verify.velocity_mixed_residual(surface, vel)
    if vel.kind != "universal":
        conj_tol = tol.get("conjugacy", 1e-10)
        rows.append(("conjugacy", mixed, None, None, conj_tol, mixed <= conj_tol))
    burgers = None
    if vel.kind == "universal":
        burgers = verify.burgers_vector(surface.profile, "universal")
    elif vel.kind == "cone":
        burgers = verify.burgers_vector(surface.profile, "cone", basis=vel.meta["basis"])
    if burgers is not None:
        rows.append(("burgers_norm", float(np.linalg.norm(burgers.b)), None, None, float("inf"), True))
    return strain, rows


def cmd_infbend(cfg):
    kind = cfg.kind or "universal"
    surface = load_surface(cfg)
    vel = make_velocity(surface, kind, cfg)
    strain, rows = infbend_report(surface, vel, cfg.tol)
    out = _output_dir(cfg)
    _write_velocity_csv(surface, vel, out / "velocity.csv")
    verify.write_report_csv(rows, out / "report.csv")
    print(f"{kind}: strain {strain.max_residual:.3e} (tolerance {strain.tolerance:.1e}) "
          f"{'pass' if strain.passed else 'FAIL'}")
    return EXIT_OK if strain.passed else EXIT_FAILED


def make_family(surface, cfg):
    kind = cfg.kind or "koko"
    if kind == "bianchi":
        return bend.bianchi_family(surface, cfg.signs, cfg.profile_signs, t_max=cfg.t_cap)
    if kind == "koko":
        return bend.koko_family(surface, cfg.signs)
    raise InvalidSpecError(f"kind: expected one of {SWEEP_KINDS}, got {kind!r}")


def sweep_values(family, t_min=None, t_max=None, steps=DEFAULT_STEPS):
    """Parameters of a sweep; defaults stay 1% inside the (capped) interval."""
    lo, hi = family.sweep_interval
    pad = SWEEP_MARGIN * (hi - lo)
    t_min = lo + pad if t_min is None else t_min
    t_max = hi - pad if t_max is None else t_max
    for t in (t_min, t_max):
        if not family.contains(t):
            a, b = family.interval
            raise ParameterRangeError(f"t = {t!r} outside the admissible interval [{a:.12g}, {b:.12g}]")
    if t_min > t_max:
        raise InvalidSpecError("t-min: must not exceed t-max")
    return np.linspace(t_min, t_max, steps)


REPORT_HEADER = ["frame", "t", "metric_deviation", "planarity", "edge_deviation",
                 "endpoint", "crease_events", "pass"]


def _run_frames(family, ts, cfg, obj_names, report_name):
    """Evaluate, check and write the frames at ``ts``; True iff all are isometric."""
    out = _output_dir(cfg)
    metric_tol = cfg.tol.get("metric", 1e-10)
    frames = [family.evaluate(float(t)) for t in ts]
    meshes = [to_quad_mesh(s) for s in frames]
    checks = verify.discrete_checks([to_quad_mesh(family.base)] + meshes)[1:]
    ok = True
    rows = []
    for k, (t, frame, mesh, check) in enumerate(zip(ts, frames, meshes, checks)):
        export_obj(mesh, out / obj_names[k])
        dev = verify.metric_deviation(family.base, frame, metric_tol)
        ok &= dev.passed
        events = bend.crease_events(family, float(t))
        for curve, param in events:
            log.info("frame %d: crease event on %s at %.12g", k, curve, param)
        rows.append([str(k), fmt(t), fmt(dev.max_residual), fmt(check.planarity),
                     fmt(check.edge_deviation), "true" if family.is_endpoint(float(t)) else "false",
                     ";".join(f"{c}@{fmt(p)}" for c, p in events), "true" if dev.passed else "false"])
    with open(out / report_name, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        writer.writerows(rows)
    return ok


def cmd_bend(cfg):
    if cfg.t is None:
        raise InvalidSpecError("t: the bending parameter is required")
    family = make_family(load_surface(cfg), cfg)
    lo, hi = family.interval
    if not family.contains(cfg.t):
        raise ParameterRangeError(f"t = {cfg.t!r} outside the admissible interval [{lo:.12g}, {hi:.12g}]")
    if family.is_endpoint(cfg.t):
        log.warning("t = %.12g is an endpoint of the interval; the family is not smooth there", cfg.t)
    ok = _run_frames(family, [cfg.t], cfg, ["bent.obj"], "bend_report.csv")
    print(f"{family.kind}: interval [{lo:.12g}, {hi:.12g}], t = {cfg.t:.12g}, "
          f"{'isometric' if ok else 'isometry FAILED'}")
    return EXIT_OK if ok else EXIT_FAILED


def cmd_sweep(cfg):
    family = make_family(load_surface(cfg), cfg)
    ts = sweep_values(family, cfg.t_min, cfg.t_max, cfg.t_steps)
    ok = _run_frames(family, ts, cfg, [f"frame_{k}.obj" for k in range(len(ts))], "sweep_report.csv")
    lo, hi = family.interval
    print(f"{family.kind}: interval [{lo:.12g}, {hi:.12g}], {len(ts)} frames, "
          f"{'all isometric' if ok else 'isometry FAILED'}")
    return EXIT_OK if ok else EXIT_FAILED


def _add_common(p):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--path", help="JSON spec of the path curve")
    p.add_argument("--profile", help="JSON spec of the profile curve")
    p.add_argument("--out", help="output directory (default: $TRANSBEND_OUT, then config, then cwd)")
    p.add_argument("--tol", help="tolerance override for the main check")
    p.add_argument("-v", "--verbose", action="store_true", default=None)


def make_parser():
    parser = argparse.ArgumentParser(prog="transbend",
                                     description="Bend surfaces of translation isometrically.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("build", help="sample a surface, write surface.obj and forms.csv")
    _add_common(p)
    p = sub.add_parser("infbend", help="infinitesimal bending, write velocity.csv and report.csv")
    _add_common(p)
    p.add_argument("--kind", choices=INFBEND_KINDS)
    p.add_argument("--constants", help="planar-normal constants, one per parallel profile piece")
    p = sub.add_parser("bend", help="one finite bending at --t, write bent.obj and bend_report.csv")
    _add_common(p)
    _add_family(p)
    p.add_argument("--t", type=float, help="bending parameter")
    p = sub.add_parser("sweep", help="finite bending sweep, write frame_<k>.obj and sweep_report.csv")
    _add_common(p)
    _add_family(p)
    p.add_argument("--t-min", type=float)
    p.add_argument("--t-max", type=float)
    p.add_argument("--t-steps", type=int)
    return parser


def _add_family(p):
    p.add_argument("--kind", choices=SWEEP_KINDS)
    p.add_argument("--t-cap", type=float, help="cap for an unbounded interval (default 10)")
    p.add_argument("--signs", help="per-piece signs of the path, e.g. 1,-1,1")
    p.add_argument("--profile-signs", help="per-piece signs of the profile (bianchi)")


COMMANDS = {"build": cmd_build, "infbend": cmd_infbend, "bend": cmd_bend, "sweep": cmd_sweep}


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = build_config(args)
        if "check" in cfg.tol:
            key = {"build": "check", "infbend": "strain", "bend": "metric", "sweep": "metric"}[cfg.command]
            cfg.tol[key] = cfg.tol.pop("check")
        return COMMANDS[cfg.command](cfg)
    except ParameterRangeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RANGE
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (TransbendError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SPEC


if __name__ == "__main__":
    sys.exit(main())
