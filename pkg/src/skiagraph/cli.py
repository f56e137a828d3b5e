"""Command-line front end: construct | matrix | compare | score.

Exit codes: 0 success, 2 user or configuration error, 3 internal or numeric
failure. Settings resolve as flags > ``--config`` file > built-in defaults;
``SKIA_OUT_DIR`` supplies the default output directory.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import compare as cmp
from .construction import (
    CANONICAL,
    SCHEMA_VERSION,
    ConstructionError,
    InternalInconsistency,
    InterpretationVariant,
    TorusElevationSpec,
    dump_json,
    run_construction,
    trace_document,
    validate_trace,
)
from .planar import GeometryError
from .oracle import DEFAULT_RESOLUTION, Torus3, oracle_shade
from .plates import PRESETS, PlateStyle, plate_construction, plate_matrix, plate_overlay
from .rubric import ParseError, load_method_profiles, proposed_method_profile, score

log = logging.getLogger("skiagraph")

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 2, 3


class UserError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str = ""
    width: float | None = None
    height: float | None = None
    preset: str | None = None
    widths: str | None = None
    heights: str | None = None
    variants: str = "canonical"
    references: str = "all"
    resolution: int = DEFAULT_RESOLUTION
    samples: int = 2048
    out: str = field(default_factory=lambda: os.environ.get("SKIA_OUT_DIR", "out"))
    formats: str = "json,svg"
    scale: float = 96.0
    profiles: str | None = None

    def metadata(self) -> dict:
        return dict(sorted(asdict(self).items()))


def _name(v: float) -> str:
    return f"{v:g}"


def parse_range(text: str) -> list[float]:
    """``"20:12"`` (inclusive, integer step) or ``"20,18,17"``."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b = (float(t) for t in text.split(":"))
            lo, hi = sorted((a, b))
            vals = []
            v = lo
            while v <= hi + 1e-9:
                vals.append(v)
                v += 1.0
        else:
            vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UserError(f"bad range {text!r}") from exc
    if not vals:
        raise UserError(f"empty range {text!r}")
    return [int(v) if float(v).is_integer() else v for v in vals]


def _variants(text: str) -> list[InterpretationVariant]:
    if text == "all":
        return InterpretationVariant.all()
    try:
        return [InterpretationVariant.parse(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UserError(str(exc)) from exc


def _kinds(text: str) -> list[cmp.ReferenceKind]:
    if text == "all":
        return list(cmp.ReferenceKind)
    try:
        return [cmp.ReferenceKind(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UserError(str(exc)) from exc


def _write(path: Path, content: str | bytes):
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(content, bytes):
        path.write_bytes(content)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(content)


def _grid(cfg: RunConfig) -> tuple[str, list, list]:
    if cfg.preset:
        if cfg.preset not in PRESETS:
            raise UserError(f"unknown preset {cfg.preset!r}; choose from {sorted(PRESETS)}")
        w, h = PRESETS[cfg.preset]
        return cfg.preset, list(w), list(h)
    if cfg.widths and cfg.heights:
        return "custom", parse_range(cfg.widths), parse_range(cfg.heights)
    if cfg.width is not None and cfg.height is not None:
        return f"{_name(cfg.width)}x{_name(cfg.height)}", [cfg.width], [cfg.height]
    raise UserError("give --preset, --widths/--heights, or --width/--height")


def cmd_construct(cfg: RunConfig) -> int:
    if cfg.width is None or cfg.height is None:
        raise UserError("construct needs --width and --height")
    variants = _variants(cfg.variants)
    spec = TorusElevationSpec(cfg.width, cfg.height)
    out = Path(cfg.out)
    formats = {f.strip() for f in cfg.formats.split(",")}
    style = PlateStyle(scale=cfg.scale)
    for variant in variants:
        trace = run_construction(spec, variant)
        suffix = "" if variant == CANONICAL else "_" + variant.name.replace("/", "-").lower()
        stem = f"{spec.config_id}{suffix}"
        if "json" in formats:
            doc = trace_document(trace, cfg.samples, cfg.metadata())
            _write(out / f"trace_{stem}.json", dump_json(doc))
        if "svg" in formats:
            _write(out / f"plate_construction_{stem}.svg",
                   plate_construction(trace, style, cfg.metadata(), cfg.samples))
        residuals = validate_trace(trace)
        worst = max(residuals, key=lambda kv: kv[1])
        print(f"{spec.config_id} {variant.name}: R={spec.major_radius:.6f} r={spec.minor_radius:.6f}")
        for k in ("D", "E"):
            p = trace[k]
            print(f"  {k} = ({p.x:.6f}, {p.z:.6f})")
        print(f"  max assertion residual {worst[1]:.3e} ({worst[0]})")
    return EXIT_OK


def cmd_matrix(cfg: RunConfig) -> int:
    name, widths, heights = _grid(cfg)
    out = Path(cfg.out)
    plate = plate_matrix(widths, heights, PlateStyle(scale=cfg.scale), cfg.metadata(), name)
    _write(out / f"plate_matrix_{name}.svg", plate.svg)
    _write(out / f"manifest_{name}.json", json.dumps(plate.manifest, indent=1) + "\n")
    for cid, trace in sorted(plate.traces.items()):
        _write(out / "traces" / f"trace_{cid}.json",
               dump_json(trace_document(trace, cfg.samples, cfg.metadata())))
    skipped = [c for c in plate.manifest["cells"] if c["status"] != "ok"]
    print(f"{name}: {plate.cell_count} cells, {len(skipped)} skipped")
    for c in skipped:
        print(f"  skipped {c['width']}x{c['height']}: {c['reason']}")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    name, widths, heights = _grid(cfg)
    variants = _variants(cfg.variants)
    kinds = _kinds(cfg.references)
    if not variants:
        raise UserError("no variants selected")
    if cfg.resolution < 64:
        raise UserError(f"resolution must be >= 64, got {cfg.resolution}")
    out = Path(cfg.out)
    style = PlateStyle(scale=cfg.scale)
    reports, errors = [], []
    for w in sorted(widths, reverse=True):
        for h in sorted(heights, reverse=True):
            try:
                spec = TorusElevationSpec(w, h)
            except ConstructionError as exc:
                errors.append({"config": f"{_name(w)}x{_name(h)}", "error": str(exc)})
                continue
            try:
                oracle = oracle_shade(Torus3.from_spec(spec), cfg.resolution)
            except Exception as exc:
                log.error("oracle failed for %s: %s", spec.config_id, exc)
                return EXIT_INTERNAL
            cache: dict = {}
            for i, variant in enumerate(variants):
                try:
                    rows = cmp.compare_config(spec, variant, kinds, oracle=oracle,
                                              samples=cfg.samples, index_cache=cache)
                except (ConstructionError, InternalInconsistency, ArithmeticError) as exc:
                    errors.append({"config": spec.config_id, "variant": variant.name, "error": str(exc)})
                    continue
                reports.extend(rows)
                if i == 0:
                    trace = run_construction(spec, variant)
                    _write(out / f"plate_overlay_{spec.config_id}.svg",
                           plate_overlay(trace, oracle, rows, style, cfg.metadata(), cfg.samples))
    _write(out / f"compare_{name}.csv", cmp.reports_csv(reports))
    doc = {"schema_version": SCHEMA_VERSION, "run_config": cfg.metadata(),
           "rows": json.loads(cmp.reports_json(reports)), "errors": errors}
    _write(out / f"compare_{name}.json", json.dumps(doc, indent=1) + "\n")
    print(f"{name}: {len(reports)} rows, {len(errors)} errors")
    for rep in reports:
        if rep.variant == CANONICAL.name:
            print(f"  {rep.config:>6} {rep.reference.value:<15} hausdorff {rep.hausdorff:.6f} in  "
                  f"d_dev {rep.d_dev:.1e} e_dev {rep.e_dev:.1e}")
    return EXIT_OK


def cmd_score(cfg: RunConfig) -> int:
    try:
        profiles = load_method_profiles(cfg.profiles)
    except ParseError as exc:
        raise UserError(f"{cfg.profiles or 'bundled profiles'}: {exc}") from exc
    except OSError as exc:
        raise UserError(str(exc)) from exc
    rows = ["row,name,steps,computed,published,status"]
    lines = []
    for i, prof in enumerate(profiles + [proposed_method_profile()], start=1):
        s = score(prof)
        status = "ok" if prof.published_score in (None, s.value) else "MISMATCH"
        label = "proposed" if i > len(profiles) else str(i)
        rows.append(f'{label},"{prof.name}",{prof.steps},{s.value},'
                    f'{"" if prof.published_score is None else prof.published_score},{status}')
        cap = " (auto-cap)" if s.auto_capped else ""
        lines.append(f"{label:>8}  {prof.name:<42} steps {prof.steps:>3}  score {s.value}{cap}"
                     f"  published {prof.published_score}  {status}")
    print("\n".join(lines))
    _write(Path(cfg.out) / "score_table.csv", "\n".join(rows) + "\n")
    mismatches = sum(1 for ln in lines if ln.endswith("MISMATCH"))
    print(f"{len(profiles)} profiles + proposed, {mismatches} mismatches")
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "matrix": cmd_matrix, "compare": cmd_compare, "score": cmd_score}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="skiagraph", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--config", help="flat TOML file of defaults")
        p.add_argument("--out", help="output directory (default $SKIA_OUT_DIR or ./out)")
        p.add_argument("--scale", type=float, help="SVG units per inch")
        p.add_argument("--samples", type=int, help="shade path samples")

    p = sub.add_parser("construct", help="run the construction for one torus")
    common(p)
    p.add_argument("--width", type=float)
    p.add_argument("--height", type=float)
    p.add_argument("--variants", help="canonical, all, or H/LM/PICK list")
    p.add_argument("--formats", help="comma list of json,svg")

    for cmd, hlp in (("matrix", "render a matrix plate"), ("compare", "compare against the oracle")):
        p = sub.add_parser(cmd, help=hlp)
        common(p)
        p.add_argument("--preset", help=f"one of {sorted(PRESETS)}")
        p.add_argument("--widths", help="e.g. 20:12 or 20,18")
        p.add_argument("--heights", help="e.g. 6:1")
        if cmd == "compare":
            p.add_argument("--width", type=float)
            p.add_argument("--height", type=float)
            p.add_argument("--variants", help="canonical, all, or H/LM/PICK list")
            p.add_argument("--references", help="all or comma list of OUTER_LOOP,INNER_LOOP,REGION_OUTLINE")
            p.add_argument("--resolution", type=int, help="oracle raster long side in pixels")

    p = sub.add_parser("score", help="score method profiles")
    common(p)
    p.add_argument("--profiles", help="profiles CSV (default: bundled Table 1 data)")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(subcommand=args.subcommand)
    known = set(asdict(cfg))
    if getattr(args, "config", None):
        try:
            with open(args.config, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise UserError(f"cannot read config {args.config}: {exc}") from exc
        for k, v in data.items():
            if k not in known or k == "subcommand":
                raise UserError(f"unknown config key {k!r}")
            setattr(cfg, k, v)
    for k, v in vars(args).items():
        if k in known and k != "subcommand" and v is not None:
            setattr(cfg, k, v)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.subcommand](cfg)
    except (InternalInconsistency, GeometryError) as exc:
        print(f"error: internal inconsistency: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (UserError, ConstructionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER


if __name__ == "__main__":
    sys.exit(main())
