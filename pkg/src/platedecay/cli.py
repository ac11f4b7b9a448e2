"""Command-line front end: JSON config in, CSV/JSON artifacts out.

Commands:

    plate-decay check     --config cfg.json [--out dir]   geometry reports
    plate-decay mesh      --config cfg.json [--out dir]   ASCII mesh
    plate-decay simulate  --config cfg.json [--out dir]   energy trace + fit
    plate-decay spectrum  --config cfg.json [--out dir]   eigenvalues + fit
    plate-decay resolvent --config cfg.json [--out dir]   axis sweep + fits
    plate-decay verify    --config cfg.json [--out dir]   identity suite

Exit codes: 0 success, 2 validation error, 3 numerical failure.  Artifacts
are deterministic for a fixed config and version (no timestamps); every
file carries a provenance header with the config hash, mesh level and tool
version.  Validation failures print a JSON error object to stderr naming
the violated invariant.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .errors import (ConfigValidationError, InsufficientDataError,
                     InvalidArgumentError, InvalidGeometryError,
                     MissingThresholdError, PlateDecayError, SolverError)
from .geometry import (DomainSpec, EdgeSpec, check_condition_g,
                       check_condition_h, find_observer_point)
from .meshing import refine, triangulate, validate_mesh, write_mesh
from .assembly import assemble, build_dof_map, dump_coo
from .plate_forms import PlateMaterial
from .dynamics import boundary_bump_data, decay_fit, eigenpacket_data, simulate
from .spectral import (damping_branch_fit, growth_fit, pencil_eigenvalues,
                       resolved_band, resolvent_sweep, suggest_sweep_omegas)

_VALIDATION_ERRORS = (ConfigValidationError, InvalidArgumentError,
                      InvalidGeometryError, MissingThresholdError)


@dataclass
class MeshParams:
    h: float = 0.25
    refinements: int = 0
    degree: int = 2
    sigma: float = None


@dataclass
class SimParams:
    dt: float = 1e-3
    T: float = 1.0
    scheme: str = "midpoint"
    initial_data: str = "boundary_bump"
    snapshot_stride: int = 0
    fit_window: tuple = None


@dataclass
class SpectralParams:
    mode: str = "eigs"
    count: object = "all"
    omega_band: tuple = None
    points: int = 120


@dataclass
class RunConfig:
    """Validated run description; mirrors the JSON config layout."""

    domain: DomainSpec
    material: PlateMaterial
    gains: tuple
    variant: int = 2
    mesh: MeshParams = field(default_factory=MeshParams)
    sim: SimParams = field(default_factory=SimParams)
    spectral: SpectralParams = field(default_factory=SpectralParams)
    search_box: tuple = None
    condition_g_policy: str = "refuse"
    seed: int = 0
    output_dir: str = "out"
    dump_matrices: bool = False
    raw: dict = None

    @classmethod
    def from_dict(cls, data):
        dom = _parse_domain(data["domain"])
        mat_d = dict(data.get("material", {}))
        mat_d.setdefault("mu", dom.poisson_ratio)
        if "J" in mat_d:  # accept the physical symbol as an alias
            mat_d["inertia"] = mat_d.pop("J")
        material = PlateMaterial(
            mu=float(mat_d.get("mu", 0.3)), rho=float(mat_d.get("rho", 1.0)),
            inertia=float(mat_d.get("inertia", 1.0)),
            d1=float(mat_d.get("d1", 1.0)), d2=float(mat_d.get("d2", 1.0)))
        if abs(material.mu - dom.poisson_ratio) > 1e-12:
            raise ConfigValidationError(
                "material.mu differs from the domain Poisson ratio",
                invariant="mu-consistent")
        gains = tuple(float(g) for g in data.get("gains", dom.corner_gains))
        if len(gains) != dom.n_corners:
            raise ConfigValidationError("one gain per corner required",
                                        invariant="gain-count")
        if gains != dom.corner_gains:
            dom = DomainSpec(vertices=dom.vertices, edges=dom.edges,
                             corner_gains=gains,
                             poisson_ratio=dom.poisson_ratio)
        mesh = MeshParams(**data.get("mesh", {}))
        sim_d = dict(data.get("sim", {}))
        if "fit_window" in sim_d and sim_d["fit_window"] is not None:
            sim_d["fit_window"] = tuple(sim_d["fit_window"])
        sim = SimParams(**sim_d)
        spec_d = dict(data.get("spectral", {}))
        if "omega_band" in spec_d and spec_d["omega_band"] is not None:
            spec_d["omega_band"] = tuple(spec_d["omega_band"])
        spectral = SpectralParams(**spec_d)
        box = data.get("check", {}).get("search_box")
        if box is not None:
            box = (tuple(box[0]), tuple(box[1]))
        cfg = cls(domain=dom, material=material, gains=gains,
                  variant=int(data.get("variant", 2)), mesh=mesh, sim=sim,
                  spectral=spectral, search_box=box,
                  condition_g_policy=data.get("condition_g_policy", "refuse"),
                  seed=int(data.get("seed", 0)),
                  output_dir=data.get("output_dir", "out"),
                  dump_matrices=bool(data.get("dump_matrices", False)),
                  raw=data)
        cfg.validate()
        return cfg

    def validate(self):
        if self.variant not in (1, 2):
            raise ConfigValidationError("variant must be 1 or 2",
                                        invariant="variant")
        if self.condition_g_policy not in ("refuse", "warn"):
            raise ConfigValidationError(
                "condition_g_policy must be 'refuse' or 'warn'",
                invariant="condition-g-policy")
        if self.mesh.degree not in (2, 3):
            raise ConfigValidationError("mesh.degree must be 2 or 3",
                                        invariant="degree-supported")
        if self.variant == 1:
            report = check_condition_g(self.domain, self.material.mu)
            if not report.satisfied:
                msg = ("variant 1 requires the small-corner-angle condition; "
                       "worst margin "
                       f"{min(report.margins.values()):.4g} rad")
                if self.condition_g_policy == "refuse":
                    raise ConfigValidationError(msg, invariant="condition-g")
                print(f"warning: {msg}", file=sys.stderr)

    def config_hash(self):
        blob = json.dumps(self.raw, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _parse_domain(data):
    edges = []
    for e in data["edges"]:
        kind = e.get("type", "segment")
        edges.append(EdgeSpec(
            kind=kind, label=int(e["label"]),
            center=tuple(e["center"]) if kind == "arc" else None,
            radius=float(e["radius"]) if kind == "arc" else None,
            ccw=bool(e.get("ccw", True))))
    return DomainSpec(
        vertices=tuple(tuple(v) for v in data["vertices"]),
        edges=tuple(edges),
        corner_gains=data.get("corner_gains"),
        poisson_ratio=float(data.get("mu", 0.3)))


# ---------------------------------------------------------------------------
# artifact output
# ---------------------------------------------------------------------------

class _Outputs:
    def __init__(self, cfg, out_dir, level):
        self.dir = out_dir
        os.makedirs(out_dir, exist_ok=True)
        self.provenance = {
            "config_hash": cfg.config_hash(),
            "mesh_level": level,
            "version": __version__,
        }

    def _header_lines(self):
        return [f"# {k}={v}" for k, v in self.provenance.items()]

    def write_csv(self, name, header, rows):
        path = os.path.join(self.dir, name)
        with open(path, "w") as f:
            for line in self._header_lines():
                f.write(line + "\n")
            f.write(header + "\n")
            for row in rows:
                f.write(",".join(f"{v:.17g}" for v in row) + "\n")
        return path

    def write_json(self, name, payload):
        path = os.path.join(self.dir, name)
        doc = {"provenance": self.provenance}
        doc.update(payload)
        with open(path, "w") as f:
            json.dump(doc, f, indent=2, sort_keys=True)
            f.write("\n")
        return path


def _build_system(cfg):
    mesh = triangulate(cfg.domain, cfg.mesh.h)
    for _ in range(cfg.mesh.refinements):
        mesh = refine(mesh)
    violations = validate_mesh(mesh, cfg.domain)
    if violations:
        raise InvalidGeometryError("; ".join(violations),
                                   invariant="mesh-valid")
    dofs = build_dof_map(mesh, cfg.mesh.degree)
    system = assemble(mesh, dofs, cfg.material, gains=cfg.gains,
                      j_variant=cfg.variant, sigma=cfg.mesh.sigma)
    return mesh, dofs, system


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _cmd_check(cfg, out):
    mu = cfg.material.mu
    g_report = check_condition_g(cfg.domain, mu)
    out.write_json("condition_g.json", {"report": g_report.to_dict(),
                                        "margins_unit": "radians"})
    if cfg.search_box is not None:
        box = cfg.search_box
    else:
        lo, hi = cfg.domain.bounding_box()
        pad = float(np.max(hi - lo))
        box = ((lo[0] - pad, lo[1] - pad), (hi[0] + pad, hi[1] + pad))
    lp_report = find_observer_point(cfg.domain, box)
    out.write_json("observer_point.json", {"report": lp_report.to_dict(),
                                           "search_box": [list(box[0]),
                                                          list(box[1])]})
    if lp_report.witness is not None:
        h_report = check_condition_h(cfg.domain, lp_report.witness[0])
    else:
        h_report = lp_report
    out.write_json("condition_h.json", {"report": h_report.to_dict()})
    print(f"condition G: {'satisfied' if g_report.satisfied else 'violated'}; "
          f"condition H: {'satisfied' if h_report.satisfied else 'violated'}")
    return 0


def _cmd_mesh(cfg, out):
    mesh = triangulate(cfg.domain, cfg.mesh.h)
    for _ in range(cfg.mesh.refinements):
        mesh = refine(mesh)
    violations = validate_mesh(mesh, cfg.domain)
    if violations:
        raise InvalidGeometryError("; ".join(violations),
                                   invariant="mesh-valid")
    path = os.path.join(out.dir, "mesh.txt")
    write_mesh(path, mesh)
    print(f"wrote {path}: {mesh.n_nodes} nodes, {mesh.n_triangles} triangles")
    return 0


def _initial_data(cfg, system):
    kind = cfg.sim.initial_data
    if kind == "boundary_bump":
        return boundary_bump_data(system)
    if kind == "eigenpacket":
        return eigenpacket_data(system)
    if kind == "zero":
        n = system.n_free
        return np.zeros(n), np.zeros(n)
    raise ConfigValidationError(f"unknown initial data kind {kind!r}",
                                invariant="initial-data")


def _cmd_simulate(cfg, out):
    mesh, dofs, system = _build_system(cfg)
    if cfg.dump_matrices:
        for name, mat in (("K", system.K), ("M", system.M), ("D", system.D)):
            dump_coo(os.path.join(out.dir, f"{name}.txt"), mat)
    u0, v0 = _initial_data(cfg, system)
    trace = simulate(system, u0, v0, dt=cfg.sim.dt, T=cfg.sim.T,
                     scheme=cfg.sim.scheme,
                     snapshot_stride=cfg.sim.snapshot_stride)
    rows = zip(trace.times, trace.energy, trace.diss_d1, trace.diss_d2,
               trace.diss_corner)
    out.write_csv("trace.csv", "t,E,diss_d1,diss_d2,diss_corner", rows)
    for step, (u, v) in sorted(trace.snapshots.items()):
        path = os.path.join(out.dir, f"state_{step:08d}.txt")
        with open(path, "w") as f:
            f.write("# u v\n")
            for a, b in zip(u, v):
                f.write(f"{a:.17g} {b:.17g}\n")
    payload = {"n_free": system.n_free, "scheme": trace.scheme,
               "E0": float(trace.energy[0]), "ET": float(trace.energy[-1])}
    window = cfg.sim.fit_window
    if window is None and cfg.sim.T >= 2.0:
        window = (max(1.0, 0.25 * cfg.sim.T), cfg.sim.T)
    if window is not None and np.all(trace.energy > 0):
        fit = decay_fit(trace, window)
        payload["decay_fit"] = fit.to_dict()
    out.write_json("decay_fit.json", payload)
    print(f"simulated {len(trace) - 1} steps; E0={trace.energy[0]:.6g} "
          f"ET={trace.energy[-1]:.6g}")
    return 0


def _cmd_spectrum(cfg, out):
    mesh, dofs, system = _build_system(cfg)
    count = cfg.spectral.count
    report = pencil_eigenvalues(system, count=count)
    lam = report.eigenvalues
    out.write_csv("spectrum.csv", "re,im", zip(lam.real, lam.imag))
    payload = report.to_dict()
    band = cfg.spectral.omega_band or _try_band(report)
    if band is not None:
        try:
            slope, r2 = damping_branch_fit(report, band)
            payload.update({"branch_slope": slope, "branch_r_squared": r2,
                            "band": list(band)})
        except (InsufficientDataError, InvalidArgumentError) as exc:
            payload["branch_fit_skipped"] = str(exc)
    out.write_json("spectrum_fit.json", payload)
    print(f"{len(lam)} eigenvalues; spectral abscissa "
          f"{report.spectral_abscissa:.6g}")
    return 0


def _try_band(report):
    try:
        return resolved_band(report)
    except (InsufficientDataError, InvalidArgumentError):
        return None


def _cmd_resolvent(cfg, out):
    mesh, dofs, system = _build_system(cfg)
    report = pencil_eigenvalues(system)
    band = cfg.spectral.omega_band or resolved_band(report)
    omegas = suggest_sweep_omegas(report, band, n_grid=cfg.spectral.points)
    sweep = resolvent_sweep(system, omegas)
    out.write_csv("sweep.csv", "omega,resolvent_norm", sweep)
    theta, r2_theta = growth_fit(sweep, band)
    payload = {"theta_hat": theta, "R2": {"theta": r2_theta},
               "bands": {"fit": list(band)}}
    try:
        slope, r2_branch = damping_branch_fit(report, band)
        payload["branch_slope"] = slope
        payload["R2"]["branch"] = r2_branch
    except (InsufficientDataError, InvalidArgumentError) as exc:
        payload["branch_fit_skipped"] = str(exc)
    out.write_json("fit_summary.json", payload)
    print(f"sweep of {len(omegas)} points; theta_hat={theta:.4g}")
    return 0


def _cmd_verify(cfg, out):
    from ._polygon import random_convex_polygon
    from .geometry import polygon_domain
    from .plate_forms import (PolyField, greens_identity_residual,
                              greens_identity_terms,
                              multiplier_identity_residual, q_density)

    rng = np.random.default_rng(cfg.seed)
    mu = cfg.material.mu
    worst_g, worst_m, worst_q = 0.0, 0.0, 0.0
    n_cases = 100
    for _ in range(n_cases):
        poly = random_convex_polygon(rng, int(rng.integers(3, 9)))
        dom = polygon_domain(poly, gamma0_edges={0}, poisson_ratio=mu)
        u = PolyField.random(rng, int(rng.integers(2, 6)))
        v = PolyField.random(rng, int(rng.integers(2, 6)))
        worst_g = max(worst_g, greens_identity_residual(u, v, dom, mu))
        um = PolyField.random(rng, int(rng.integers(2, 5)))
        x0 = rng.uniform(-2.0, 2.0, size=2)
        worst_m = max(worst_m, multiplier_identity_residual(um, dom, mu, x0))
        x = rng.uniform(-1.0, 1.0, size=2)
        worst_q = min(worst_q, q_density(u, mu, x))

    from .geometry import unit_square_domain
    square = unit_square_domain(gamma0_edges=(0, 3), poisson_ratio=mu)
    hand = greens_identity_terms(PolyField.monomial(2, 0),
                                 PolyField.monomial(2, 0), square, mu)
    tol = 1e-9
    ok = worst_g <= tol and worst_m <= tol and worst_q >= -1e-14
    payload = {
        "passed": bool(ok),
        "tolerance": tol,
        "greens_max_residual": worst_g,
        "multiplier_max_residual": worst_m,
        "q_density_min": worst_q,
        "n_cases": n_cases,
        "hand_case_square_terms": {k: float(v) for k, v in hand.items()},
    }
    out.write_json("verify.json", payload)
    print(f"verify: {'PASS' if ok else 'FAIL'} "
          f"(greens {worst_g:.3e}, multiplier {worst_m:.3e})")
    if not ok:
        raise SolverError("identity residuals exceed tolerance",
                          invariant="identity-tolerance")
    return 0


_COMMANDS = {
    "check": _cmd_check,
    "mesh": _cmd_mesh,
    "simulate": _cmd_simulate,
    "spectrum": _cmd_spectrum,
    "resolvent": _cmd_resolvent,
    "verify": _cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="plate-decay",
        description="Boundary-damped Kirchhoff plate laboratory")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run config")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
    return parser


def run(config, command, out_dir=None):
    """Programmatic entry point; returns the command's exit status."""
    if command not in _COMMANDS:
        raise InvalidArgumentError(f"unknown command {command!r}",
                                   invariant="command")
    out = _Outputs(config, out_dir or config.output_dir,
                   level=config.mesh.refinements)
    return _COMMANDS[command](config, out)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as f:
            data = json.load(f)
        if args.seed is not None:
            data["seed"] = args.seed
        cfg = RunConfig.from_dict(data)
        status = run(cfg, args.command, out_dir=args.out)
    except _VALIDATION_ERRORS as exc:
        _emit_error(exc, 2)
        return 2
    except (SolverError, InsufficientDataError, np.linalg.LinAlgError) as exc:
        _emit_error(exc, 3)
        return 3
    except (OSError, json.JSONDecodeError, KeyError, TypeError,
            ValueError) as exc:
        _emit_error(exc, 2)
        return 2
    return status


def _emit_error(exc, code):
    doc = {"error": type(exc).__name__, "message": str(exc),
           "invariant": getattr(exc, "invariant", None), "exit_code": code}
    print(json.dumps(doc), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
