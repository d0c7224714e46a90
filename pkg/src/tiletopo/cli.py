"""Command line entry point: ``tiletopo <subcommand>``.

Exit status is 0 on success, 1 when a verification check fails and 2 for usage,
configuration or budget errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path


from . import __version__
from .config import load_config
from .criteria import classify
from .errors import ConfigError, ResourceError, TileTopoError
from .io import mesh_to_obj, pgm_bytes, rasterize, surface_grid
from .prism import PathProfile, base_prism, compose_h, profile_from_pair
from .tile import SelfAffinePair, approximate, cloud_from_csv, cloud_to_csv
from .verify import check_convergence, check_height_properties, check_injectivity

EXIT_OK, EXIT_FAILED, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI-style run configuration")
    common.add_argument("--seed", type=int, help="overrides run.seed")
    common.add_argument("--threads", type=int, help="worker cap for neighbour queries")
    common.add_argument("--out", type=Path, help="directory for output files")
    common.add_argument("--format", choices=("csv", "obj", "pgm"), help="output format")
    common.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                        help="override one config value (repeatable)")
    common.add_argument("-p", help="diagonal entries, e.g. 3,3,3 (overrides pair.p)")
    common.add_argument("-s", help="shear column, e.g. 2,9/5 (overrides pair.s)")

    parser = argparse.ArgumentParser(prog="tiletopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("approximate", parents=[common], help="level-n digit cloud of the tile")
    sub.add_parser("classify", parents=[common], help="topology verdict from the closed-form criterion")
    sub.add_parser("iterate", parents=[common], help="deform the base prism through h_1 .. h_n")
    sub.add_parser("verify", parents=[common], help="numerical checks of the prism iteration")
    exp = sub.add_parser("export", parents=[common], help="convert a CSV cloud to another format")
    exp.add_argument("input", type=Path)
    return parser


def _config(args):
    text = args.config.read_text() if args.config else ""
    overrides = list(args.set)
    if args.p:
        overrides.append(f"pair.p={args.p}")
    if args.s:
        overrides.append(f"pair.s={args.s}")
    if args.seed is not None:
        overrides.append(f"run.seed={args.seed}")
    if args.threads is not None:
        overrides.append(f"run.threads={args.threads}")
    return load_config(text, overrides)


def _pair(cfg) -> SelfAffinePair:
    p = cfg["pair"]["p"]
    if p is None:
        raise ConfigError("pair.p is required")
    s = cfg["pair"]["s"]
    if s is None:
        s = (0,) * (len(p) - 1)
    return SelfAffinePair.standard(p, s, cfg["pair"]["offsets"])


def _profile(cfg, pair, prism) -> PathProfile:
    prof = profile_from_pair(pair, cfg["iterate"]["eps"], prism)
    if cfg["iterate"]["u"] is not None:
        prof = PathProfile(prof.r, prof.b, prof.eps, cfg["iterate"]["u"])
    return prof


def _header(cfg, command: str) -> list[str]:
    return [f"tiletopo {command}"] + [f"config {line}" for line in cfg.echo()]


def _emit(out: Path | None, name: str, data, stdout: bool = False):
    if out is None:
        if stdout:
            sys.stdout.write(data if isinstance(data, str) else "")
        return
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    if isinstance(data, bytes):
        path.write_bytes(data)
    else:
        path.write_text(data)
    print(f"wrote {path}")


def _cloud_output(points, d, n, fmt, cfg, command):
    head = _header(cfg, command)
    if fmt == "pgm":
        img = rasterize(points, cfg["raster"]["width"], cfg["raster"]["height"])
        return "pgm", pgm_bytes(img, head)
    if fmt == "obj":
        return "obj", mesh_to_obj(points, None, head)
    text = cloud_to_csv(points, d, n)
    first, rest = text.split("\n", 1)
    return "csv", first + "\n" + "".join(f"# {c}\n" for c in head) + rest


def cmd_approximate(args, cfg) -> int:
    pair = _pair(cfg)
    level = cfg["approximate"]["level"]
    approx = approximate(pair, level, cfg["approximate"]["budget"], cfg["approximate"]["exact"])
    ext, data = _cloud_output(approx.points, pair.d, level, args.format or "csv", cfg, "approximate")
    _emit(args.out, f"cloud_n{level}.{ext}", data, stdout=isinstance(data, str))
    if args.out is not None:
        print(f"points={len(approx)} cell_radius={approx.cell_radius:.17g}")
    return EXIT_OK


def cmd_classify(args, cfg) -> int:
    p = cfg["pair"]["p"]
    if p is None:
        raise ConfigError("pair.p is required")
    s = cfg["pair"]["s"] or (0,) * (len(p) - 1)
    verdict = classify(p[:-1], s, p[-1])
    line = verdict.line()
    print(line)
    if args.out is not None:
        _emit(args.out, "classify.txt", "".join(f"# {c}\n" for c in _header(cfg, "classify")) + line + "\n")
    return EXIT_OK


def cmd_iterate(args, cfg) -> int:
    pair = _pair(cfg)
    prism = base_prism(pair)
    profile = _profile(cfg, pair, prism)
    depth, grid = cfg["iterate"]["depth"], cfg["iterate"]["grid"]
    fmt = args.format or "obj"
    h = compose_h(prism, pair, profile, depth)
    verts, faces = surface_grid(prism, grid)
    trail = h.trajectory(verts)
    head = _header(cfg, "iterate")
    for k, pts in enumerate(trail):
        if fmt == "obj":
            _emit(args.out, f"mesh_depth{k}.obj", mesh_to_obj(pts, faces, head + [f"depth {k}"]),
                  stdout=k == depth)
        else:
            ext, data = _cloud_output(pts, pair.d, k, fmt, cfg, "iterate")
            _emit(args.out, f"points_depth{k}.{ext}", data, stdout=k == depth and isinstance(data, str))
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    pair = _pair(cfg)
    prism = base_prism(pair)
    profile = _profile(cfg, pair, prism)
    v = cfg["verify"]
    seed, threads = cfg["run"]["seed"], cfg["run"]["threads"]
    reports = []
    if "injectivity" in v["checks"]:
        h = compose_h(prism, pair, profile, v["depth"])
        reports.append(check_injectivity(h, prism, v["pairs"], v["delta"], seed))
    if "height" in v["checks"]:
        h = compose_h(prism, pair, profile, v["height_depth"])
        reports.append(check_height_properties(h, prism, v["samples"], seed, v["stabilize_by"]))
    if "convergence" in v["checks"]:
        reports.append(check_convergence(pair, prism, profile, v["depth"], v["level"], v["grid"],
                                         v["tolerance"], workers=threads))
    head = "".join(f"# {c}\n" for c in _header(cfg, "verify"))
    text = head + "".join(r.to_text() for r in reports)
    print("".join(r.to_text() for r in reports), end="")
    if args.out is not None:
        _emit(args.out, "report.txt", text)
        _emit(args.out, "report.kv", head + "\n".join(r.to_kv() for r in reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


def cmd_export(args, cfg) -> int:
    points, meta = cloud_from_csv(args.input.read_text())
    fmt = args.format or "csv"
    d = meta.get("d", points.shape[1])
    n = meta.get("n", 0)
    ext, data = _cloud_output(points, d, n, fmt, cfg, "export")
    _emit(args.out, f"{args.input.stem}.{ext}", data, stdout=isinstance(data, str))
    return EXIT_OK


COMMANDS = {
    "approximate": cmd_approximate,
    "classify": cmd_classify,
    "iterate": cmd_iterate,
    "verify": cmd_verify,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, ResourceError) as exc:
        print(f"tiletopo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tiletopo: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TileTopoError as exc:
        print(f"tiletopo: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
