"""
Command-line driver.

Exit codes: 0 success, 1 verification failure, 2 usage or setup error.
All floats in CSV output use 17 significant digits.
"""

from __future__ import annotations

import argparse
import io
import sys
from pathlib import Path

import numpy as np

from . import disk_oracle
from .fem import OutOfDomainError, assemble, evaluate, locate
from .kernels import KernelField, hs_equivalence_report, kernel_eval, lions_formula
from .mesh import DOMAINS, Mesh, MeshError, generate, read_mesh, write_mesh
from .pipeline import boundary_angles, build_systems
from .verify import run_identity_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

COMMON_DEFAULTS = {
    "mesh": None,
    "domain": "disk",
    "h": 0.2,
    "tol": None,
    "modes": None,
    "s": 0.0,
    "out": None,
}
_CONFIG_TYPES = {"h": float, "tol": float, "modes": int, "s": float}


class UsageError(Exception):
    pass


def fmt(x) -> str:
    return f"{float(x):.17g}"


def _parse_point(text: str) -> tuple[float, float]:
    try:
        x, y = (float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"bad point {text!r}; expected 'x,y'") from None
    return x, y


def _parse_points(texts) -> list[tuple[float, float]]:
    pts = []
    for t in texts or []:
        pts += [_parse_point(p) for p in t.replace(";", " ").split()]
    return pts


def _load_config(path: str) -> dict:
    cfg = {}
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{ln}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in COMMON_DEFAULTS:
            raise UsageError(f"{path}:{ln}: unknown key {key!r}")
        if key in cfg:
            raise UsageError(f"{path}:{ln}: duplicate key {key!r}")
        try:
            cfg[key] = _CONFIG_TYPES.get(key, str)(value)
        except ValueError:
            raise UsageError(f"{path}:{ln}: bad value for {key}: {value!r}") from None
    return cfg


def _resolve(args) -> None:
    """Merge ``--config`` into ``args``; a conflicting explicit flag is an error."""
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    for key, default in COMMON_DEFAULTS.items():
        if not hasattr(args, key):
            continue
        given = getattr(args, key)
        if key in cfg:
            if given is not None and given != cfg[key]:
                raise UsageError(f"--{key} {given} conflicts with config value {cfg[key]}")
            setattr(args, key, cfg[key])
        elif given is None:
            setattr(args, key, default)
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        raise UsageError("tolerance must be positive")


def _get_mesh(args) -> Mesh:
    if getattr(args, "mesh", None):
        try:
            return read_mesh(Path(args.mesh).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read mesh: {exc}") from None
    if args.domain not in DOMAINS:
        raise UsageError(f"unknown domain {args.domain!r}")
    return generate(args.domain, args.h)


def looks_like_disk(mesh: Mesh) -> bool:
    r = np.hypot(*mesh.vertices[mesh.boundary_vertex_ids].T)
    return bool(np.allclose(r, 1.0, atol=1e-12) and np.hypot(*mesh.vertices.T).max() <= 1 + 1e-12)


def _emit(args, text: str, summary: str | None = None) -> None:
    if args.out:
        Path(args.out).write_text(text)
        if summary:
            print(summary, file=sys.stderr)
    else:
        sys.stdout.write(text)


def cmd_mesh(args) -> int:
    if args.h is not None and not args.h > 0:
        raise UsageError("h must be positive")
    _resolve(args)
    mesh = _get_mesh(args)
    text = write_mesh(mesh)
    if args.out:
        Path(args.out).write_text(text)
        print(f"{args.domain}: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, "
              f"{len(mesh.boundary_edges)} boundary edges -> {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    _resolve(args)
    mesh = _get_mesh(args)
    results = run_identity_suite(mesh, tol=args.tol, seed=args.seed)
    buf = io.StringIO()
    buf.write("identity_name,residual,tolerance,pass\n")
    for r in results:
        buf.write(f"{r.name},{fmt(r.residual)},{fmt(r.tolerance)},{str(r.passed).lower()}\n")
    failed = [r for r in results if not r.passed]
    _emit(args, buf.getvalue(), f"{len(results) - len(failed)}/{len(results)} identities pass")
    for r in failed:
        print(f"FAIL {r.name}: residual {r.residual:.3e} > {r.tolerance:.1e}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


def cmd_basis(args) -> int:
    _resolve(args)
    mesh = _get_mesh(args)
    try:
        sy = build_systems(mesh, args.modes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    b = sy.basis
    disk = looks_like_disk(mesh)
    oracle = disk_oracle.expected_spectrum("kappa_sq", b.n_modes) if disk else None
    header = ["index", "kappa_sq", "tau_sq"]
    if disk:
        header += ["oracle_kappa_sq", "rel_err"]
    header += [f"c{i}" for i in range(mesh.n_vertices)]
    lines = [",".join(header)]
    for j in range(b.n_modes):
        row = [str(j), fmt(b.kappa_sq[j]), fmt(b.tau_sq[j])]
        if disk:
            row += [fmt(oracle[j]), fmt(abs(b.kappa_sq[j] - oracle[j]) / oracle[j])]
        row += [fmt(c) for c in b.phi[:, j]]
        lines.append(",".join(row))
    _emit(args, "\n".join(lines) + "\n", f"{b.n_modes} modes")
    return EXIT_OK


def _grid_points(mesh: Mesh, grid: str) -> list[tuple[float, float]]:
    try:
        nx, ny = (int(t) for t in grid.split(","))
    except ValueError:
        raise UsageError(f"bad grid {grid!r}; expected 'nx,ny'") from None
    (x0, y0), (x1, y1) = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    pts = []
    for y in np.linspace(y0, y1, ny):
        for x in np.linspace(x0, x1, nx):
            try:
                locate(mesh, (x, y))
            except OutOfDomainError:
                continue
            pts.append((float(x), float(y)))
    return pts


def cmd_kernel(args) -> int:
    _resolve(args)
    if not 0 <= args.s <= 1:
        raise UsageError(f"s={args.s} outside [0, 1]")
    mesh = _get_mesh(args)
    points = _parse_points(args.points)
    if args.grid:
        points += _grid_points(mesh, args.grid)
    if not points:
        raise UsageError("no evaluation points; use --points or --grid")
    pole = _parse_point(args.pole) if args.pole else None
    locate(mesh, points + ([pole] if pole else []))
    sy = build_systems(mesh, args.modes)
    kf = KernelField(sy.basis, s=args.s, level=args.level)
    lines = ["x,y,value"]
    for p in points:
        lines.append(f"{fmt(p[0])},{fmt(p[1])},{fmt(kernel_eval(kf, p, pole or p))}")
    _emit(args, "\n".join(lines) + "\n", f"{len(points)} kernel values")
    return EXIT_OK


def _boundary_data(args, mesh: Mesh) -> np.ndarray:
    if args.g_file:
        g = np.loadtxt(args.g_file, dtype=float, ndmin=1)
        if g.shape != (len(mesh.boundary_vertex_ids),):
            raise UsageError(f"g file has {g.size} values, mesh has {len(mesh.boundary_vertex_ids)} boundary vertices")
        return g
    if not args.g_fourier:
        raise UsageError("boundary data required: --g-fourier cos:k|sin:k or --g-file")
    try:
        kind, k = args.g_fourier.split(":")
        k = int(k)
        mode = disk_oracle.DiskMode(k, kind)
    except ValueError:
        raise UsageError(f"unknown Fourier tag {args.g_fourier!r}") from None
    return mode.boundary(boundary_angles(mesh))


def cmd_lions(args) -> int:
    _resolve(args)
    mesh = _get_mesh(args)
    g = _boundary_data(args, mesh)
    points = _parse_points(args.point)
    if not points:
        raise UsageError("at least one --point x,y is required")
    locate(mesh, points)
    sy = build_systems(mesh)
    kf = KernelField(sy.basis)
    ext = sy.emb.k @ g
    lines = ["x,y,boundary_integral,direct_extension,difference"]
    for p in points:
        a = lions_formula(sy.emb, kf, g, p)
        b = evaluate(mesh, ext, p)
        lines.append(",".join(fmt(v) for v in (p[0], p[1], a, b, a - b)))
    _emit(args, "\n".join(lines) + "\n", f"{len(points)} points")
    return EXIT_OK


def cmd_hscale(args) -> int:
    _resolve(args)
    orders = args.orders or ([args.s] if args.s >= 1 else [1.0, 1.25, 1.49])
    for s in orders:
        if not 1.0 <= s < 1.5:
            raise UsageError(f"s={s} outside [1, 3/2)")
    mesh = _get_mesh(args)
    sy = build_systems(mesh)
    lines = ["s,ratio_min,ratio_max,spread,sample_min,sample_max"]
    for s in orders:
        r = hs_equivalence_report(sy.trace, sy.emb, sy.basis, s)
        lines.append(",".join(fmt(r[k]) for k in ("s", "ratio_min", "ratio_max", "spread", "sample_min", "sample_max")))
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_matrices(args) -> int:
    _resolve(args)
    fem = assemble(_get_mesh(args))
    mat = {
        "stiffness": fem.stiffness,
        "mass": fem.mass,
        "boundary_mass": fem.boundary_mass,
        "boundary_mass_restricted": fem.boundary_mass_restricted,
        "trace": fem.trace_matrix,
    }[args.which]
    rows, cols = np.nonzero(mat)
    lines = ["row,col,value"] + [f"{i},{j},{fmt(mat[i, j])}" for i, j in zip(rows, cols)]
    _emit(args, "\n".join(lines) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bergmanlab", description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, mesh_input=True):
        if mesh_input:
            p.add_argument("--mesh", help="mesh file (overrides --domain/--h)")
        p.add_argument("--domain", choices=DOMAINS)
        p.add_argument("--h", type=float, help="target edge length")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--config", help="flat key=value file; conflicting flags are an error")
        return p

    p = common(sub.add_parser("mesh", help="generate a mesh file"), mesh_input=False)
    p.set_defaults(func=cmd_mesh)

    p = common(sub.add_parser("verify", help="run the exact identity suite"))
    p.add_argument("--tol", type=float, help="override every identity tolerance")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    p = common(sub.add_parser("basis", help="spectral Bergman basis CSV"))
    p.add_argument("--modes", type=int)
    p.set_defaults(func=cmd_basis)

    p = common(sub.add_parser("kernel", help="reproducing kernel values"))
    p.add_argument("--s", type=float)
    p.add_argument("--modes", type=int)
    p.add_argument("--level", choices=("bergman", "h1"), default="bergman")
    p.add_argument("--points", action="append", help="'x,y' points separated by ';' or spaces")
    p.add_argument("--grid", help="'nx,ny' grid over the bounding box (outside points skipped)")
    p.add_argument("--pole", help="second kernel argument 'x,y' (default: the point itself)")
    p.set_defaults(func=cmd_kernel)

    p = common(sub.add_parser("lions", help="boundary-integral reconstruction"))
    p.add_argument("--g-fourier", help="nodal boundary data cos:k or sin:k")
    p.add_argument("--g-file", help="boundary values, one per boundary vertex")
    p.add_argument("--point", action="append", help="evaluation point 'x,y'")
    p.set_defaults(func=cmd_lions)

    p = common(sub.add_parser("hscale", help="H^s norm equivalence report, 1 <= s < 3/2"))
    p.add_argument("--s", type=float)
    p.add_argument("--orders", type=float, nargs="+")
    p.set_defaults(func=cmd_hscale)

    p = common(sub.add_parser("matrices", help="export FEM matrices as row,col,value"))
    p.add_argument("--which", default="stiffness",
                   choices=("stiffness", "mass", "boundary_mass", "boundary_mass_restricted", "trace"))
    p.set_defaults(func=cmd_matrices)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, MeshError, OutOfDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
