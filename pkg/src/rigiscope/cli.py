"""Command-line interface.

Reports go to stdout as JSON and a short human summary goes to stderr.
Exit status is 0 when a command completes, 2 when a verdict is withheld
because path tracking was not clean, and 1 on errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from .catalog import parse_framework, read_framework  # noqa: F401  (re-exported)
from .errors import ParseError, RigiscopeError
from .framework import Framework, infinitesimal_flexes
from .pathtrack import TrackerSettings
from .rigidity import (DiscreteFlex, discrete_flex, eps_local_rigidity, flex_direction,
                       flex_param_homotopy)

EXIT_OK, EXIT_ERROR, EXIT_WITHHELD = 0, 1, 2

_TRACKER_FLAGS = {
    "initial_step": float, "min_step": float, "max_step": float, "corrector_tol": float,
    "t_endgame": float, "real_threshold": float, "dedupe_tol": float, "batch_size": int,
}


# -- reports ----------------------------------------------------------------------


def info_report(fw: Framework) -> dict:
    fb = infinitesimal_flexes(fw)
    rigid = fb.infinitesimally_rigid
    return {
        "n": fw.n, "m": fw.m, "d": fw.d, "N": fw.N,
        "rank": fb.rank, "dim_RM": fb.rigid_motions.shape[0], "dim_F": fb.flexes.shape[0],
        "verdict": "infinitesimally rigid (hence locally rigid)" if rigid
        else "inconclusive at first order",
    }


def _emit(report: dict, summary: str) -> None:
    sys.stdout.write(json.dumps(report, indent=1, sort_keys=True) + "\n")
    sys.stderr.write(summary + "\n")


# -- frame export -------------------------------------------------------------------


def frames_to_csv(configs: np.ndarray, fw: Framework) -> str:
    """CSV text: two comment lines carrying dimension and edges, a header, one row per frame."""
    buf = io.StringIO()
    buf.write(f"# dimension={fw.d}\n")
    buf.write("# edges=" + ";".join(f"{i + 1}-{j + 1}" for i, j in fw.edges) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    axes = "xyz"[:fw.d] if fw.d <= 3 else [f"c{k}" for k in range(fw.d)]
    w.writerow([f"{a}{i + 1}" for i in range(fw.n) for a in axes])
    for row in np.atleast_2d(configs):
        w.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def read_frames_csv(text: str) -> tuple[int, list, np.ndarray]:
    meta, rows = {}, []
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition("=")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    if "dimension" not in meta or "edges" not in meta:
        raise ParseError("frames file lacks the dimension/edges comment lines")
    try:
        d = int(meta["dimension"])
        edges = [tuple(int(k) - 1 for k in e.split("-")) for e in meta["edges"].split(";") if e]
        for k, row in enumerate(csv.reader(body[1:])):
            rows.append([float(v) for v in row])
    except ValueError as exc:
        raise ParseError(f"malformed frames file: {exc}") from None
    return d, edges, np.array(rows)


_VIEWS = {
    "xy": np.array([[1.0, 0, 0], [0, 1.0, 0]]),
    "xz": np.array([[1.0, 0, 0], [0, 0, 1.0]]),
    "yz": np.array([[0, 1.0, 0], [0, 0, 1.0]]),
    "iso": np.array([[np.sqrt(0.5), -np.sqrt(0.5), 0], [-np.sqrt(1 / 6), -np.sqrt(1 / 6), np.sqrt(2 / 3)]]),
}


def frames_to_svg(d: int, edges, configs: np.ndarray, view: str = "iso", size: int = 400) -> list[str]:
    """One SVG document per frame, drawn on a common scale."""
    if d not in (2, 3):
        raise ValueError(f"svg export supports d = 2 or 3, got {d}")
    configs = np.atleast_2d(configs)
    pts = configs.reshape(configs.shape[0], -1, d)
    if d == 3:
        if view not in _VIEWS:
            raise ValueError(f"unknown view {view!r}; choose from {', '.join(_VIEWS)}")
        pts = pts @ _VIEWS[view].T
    lo = pts.reshape(-1, 2).min(axis=0)
    hi = pts.reshape(-1, 2).max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-9)
    margin = 20
    scale = (size - 2 * margin) / span

    def xy(p):
        return margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale

    docs = []
    for frame in pts:
        out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
               f'viewBox="0 0 {size} {size}">', '<rect width="100%" height="100%" fill="white"/>']
        for i, j in edges:
            (x1, y1), (x2, y2) = xy(frame[i]), xy(frame[j])
            out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                       'stroke="black" stroke-width="2"/>')
        for p in frame:
            cx, cy = xy(p)
            out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="5" fill="steelblue"/>')
        out.append("</svg>")
        docs.append("\n".join(out) + "\n")
    return docs


def export_frames(flex: DiscreteFlex, fw: Framework, fmt: str, out_dir, view: str = "iso") -> list[Path]:
    """Write a flex as ``frames.csv`` or as ``frame_0000.svg``, ... in ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    configs = flex.configurations()
    if fmt == "csv":
        path = out / "frames.csv"
        path.write_text(frames_to_csv(configs, fw))
        return [path]
    if fmt == "svg":
        paths = []
        for k, doc in enumerate(frames_to_svg(fw.d, fw.edges, configs, view)):
            p = out / f"frame_{k:04d}.svg"
            p.write_text(doc)
            paths.append(p)
        return paths
    raise ValueError(f"unknown frame format {fmt!r}")


# -- commands ----------------------------------------------------------------------


def _settings(args) -> TrackerSettings:
    kw = {k: getattr(args, k) for k in _TRACKER_FLAGS if getattr(args, k, None) is not None}
    return TrackerSettings.from_env(**kw)


def cmd_info(args) -> int:
    fw = read_framework(args.file)
    rep = info_report(fw)
    _emit(rep, f"{fw.n} nodes, {fw.m} edges in R^{fw.d}: rank {rep['rank']}, "
               f"dim F = {rep['dim_F']}; {rep['verdict']}")
    return EXIT_OK


def cmd_eps_rigid(args) -> int:
    fw = read_framework(args.file)
    rep = eps_local_rigidity(fw, args.eps, args.seed, _settings(args))
    d = rep.to_dict()
    if not args.timings:
        d.pop("timings")
    _emit(d, f"{rep.verdict} (seed {rep.seed}, {rep.n_paths} paths, {len(rep.R)} real points)")
    return EXIT_OK if rep.v else EXIT_WITHHELD


def _flex_output(flex: DiscreteFlex, fw: Framework, args, extra: dict) -> int:
    rep = flex.to_dict()
    rep.update(extra)
    if args.out:
        paths = export_frames(flex, fw, args.format, args.out, args.view)
        rep["files"] = [str(p) for p in paths]
    _emit(rep, f"{len(flex.points)} configurations; {flex.terminated_reason}")
    return EXIT_WITHHELD if flex.terminated_reason.kind == "VerdictWithheld" else EXIT_OK


def cmd_flex(args) -> int:
    fw = read_framework(args.file)
    flex = discrete_flex(fw, args.eps0, args.steps, args.seed, _settings(args))
    return _flex_output(flex, fw, args, {"seed": args.seed})


def _read_direction(path: str, size: int) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    try:
        v = np.array(json.loads(text), dtype=float).reshape(-1)
    except (json.JSONDecodeError, ValueError, TypeError):
        try:
            v = np.array(text.replace(",", " ").split(), dtype=float)
        except ValueError:
            raise ParseError(f"{path}: direction must be a list of numbers") from None
    if v.size != size:
        raise ParseError(f"{path}: direction has {v.size} entries, expected {size}")
    return v


def cmd_flexdir(args) -> int:
    fw = read_framework(args.file)
    if args.direction:
        v = _read_direction(args.direction, fw.n * fw.d)
    else:
        v = flex_direction(fw, args.flex_index)
    if args.reverse:
        v = -v
    flex = flex_param_homotopy(fw, v, args.eps0, args.steps, _settings(args),
                               residual_tol=args.residual_tol)
    return _flex_output(flex, fw, args, {"direction": [float(c) for c in v]})


def cmd_render(args) -> int:
    try:
        text = Path(args.frames).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {args.frames}: {exc.strerror}") from None
    d, edges, configs = read_frames_csv(text)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for k, doc in enumerate(frames_to_svg(d, edges, configs, args.view)):
        p = out / f"frame_{k:04d}.svg"
        p.write_text(doc)
        files.append(str(p))
    _emit({"files": files}, f"wrote {len(files)} svg frames to {out}")
    return EXIT_OK


# -- argument parsing ----------------------------------------------------------------


def _positive(kind):
    def conv(text):
        v = kind(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rigiscope", description="Numerical rigidity analysis of bar-and-joint frameworks.")
    sub = p.add_subparsers(dest="command", required=True)

    def tracker_flags(sp):
        g = sp.add_argument_group("tracker settings")
        for name, kind in _TRACKER_FLAGS.items():
            g.add_argument("--" + name.replace("_", "-"), type=_positive(kind), default=None)

    def frame_flags(sp):
        sp.add_argument("--out", help="directory for frame files")
        sp.add_argument("--format", choices=("csv", "svg"), default="csv")
        sp.add_argument("--view", choices=tuple(_VIEWS), default="iso",
                        help="projection plane for 3-D svg frames")

    sp = sub.add_parser("info", help="rank, flexes and first-order verdict")
    sp.add_argument("file")
    sp.set_defaults(func=cmd_info)

    sp = sub.add_parser("eps-rigid", help="epsilon-local rigidity test")
    sp.add_argument("file")
    sp.add_argument("--eps", type=_positive(float), required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    tracker_flags(sp)
    sp.set_defaults(func=cmd_eps_rigid)

    sp = sub.add_parser("flex", help="discrete flex on growing spheres")
    sp.add_argument("file")
    sp.add_argument("--eps0", type=_positive(float), required=True)
    sp.add_argument("--steps", type=_positive(int), required=True)
    sp.add_argument("--seed", type=int, default=0)
    tracker_flags(sp)
    frame_flags(sp)
    sp.set_defaults(func=cmd_flex)

    sp = sub.add_parser("flexdir", help="follow an infinitesimal flex direction")
    sp.add_argument("file")
    sp.add_argument("--eps0", type=_positive(float), required=True)
    sp.add_argument("--steps", type=_positive(int), required=True)
    which = sp.add_mutually_exclusive_group(required=True)
    which.add_argument("--flex-index", type=int)
    which.add_argument("--direction", help="file with n*d numbers")
    sp.add_argument("--reverse", action="store_true", help="follow the opposite direction")
    sp.add_argument("--residual-tol", type=_positive(float), default=None,
                    help="stop once the member residual exceeds this")
    tracker_flags(sp)
    frame_flags(sp)
    sp.set_defaults(func=cmd_flexdir)

    sp = sub.add_parser("render", help="turn a frames csv into svg files")
    sp.add_argument("frames")
    sp.add_argument("--format", choices=("svg",), default="svg")
    sp.add_argument("--out", required=True)
    sp.add_argument("--view", choices=tuple(_VIEWS), default="iso")
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is not None and not 0 <= getattr(args, "seed", 0) < 2 ** 64:
        parser.error("--seed must be a 64-bit unsigned integer")
    try:
        return args.func(args)
    except (RigiscopeError, ValueError, IndexError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
