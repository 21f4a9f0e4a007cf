"""Batch command line: phantom generation, serving, replay, postprocessing.

Exit codes: 0 success, 1 processing failure, 2 bad arguments.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from gazebench.errors import GazebenchError
from gazebench.metrics import (
    GazeCorrectionCase,
    ViewingGeometry,
    agreement_report,
    calibration_metrics,
    gaze_correction_eval,
)
from gazebench.postprocess import (
    StudyRead,
    export_checksums,
    export_coco,
    validate_export,
    write_gaze_artifacts,
    write_pseudo_seg_artifact,
)
from gazebench.session import parse_session, replay
from gazebench.studies import (
    DATA_ROOT_ENV,
    data_root,
    load_study,
    resolve_study,
    write_phantom_study,
)
from gazebench.volume import Modality, PhantomSpec, ScalarVolume, mip_stack
from gazebench.volume.nifti import save_volume


def _print_table(rows) -> None:
    widths = [max(len(str(row[i])) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(str(cell).ljust(w) for cell, w in zip(row, widths)))


def _geometry_from(path: Optional[str]) -> ViewingGeometry:
    if path is None:
        return ViewingGeometry()
    doc = json.loads(Path(path).read_text())
    return ViewingGeometry(
        screen_width_mm=float(doc["screen_width_mm"]),
        screen_height_mm=float(doc["screen_height_mm"]),
        monitor_width_px=int(doc["monitor_width_px"]),
        monitor_height_px=int(doc["monitor_height_px"]),
    )


def cmd_phantom(args) -> int:
    spec = PhantomSpec.from_json(Path(args.spec))
    out = write_phantom_study(spec, args.out)
    print(f"phantom study written to {out}")
    return 0


def cmd_serve(args) -> int:
    from gazebench.gateway.service import ServiceConfig, WorkbenchService

    root = data_root(args.data_root)
    if args.config:
        config = ServiceConfig.from_file(
            args.config, data_root=root, host=args.host, port=args.port
        )
    else:
        config = ServiceConfig(data_root=root, host=args.host, port=args.port)
    service = WorkbenchService(config)

    async def run():
        await service.start()
        print(
            f"workbench gateway listening on {config.host}:{service.port}", flush=True
        )
        await service._server.serve_forever()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass
    return 0


def cmd_replay(args) -> int:
    recording = parse_session(args.session_dir)
    study = load_study(resolve_study(args.study_dir))
    result = replay(recording, study.pet)
    print(
        f"replay ok: {len(result.lesions)} lesion(s) reproduced exactly, "
        f"{len(result.warnings)} warning(s)"
    )
    return 0


def cmd_heatmap(args) -> int:
    recording = parse_session(args.session_dir)
    study = load_study(resolve_study(args.study_dir))
    paths = write_gaze_artifacts(recording, study.pet, args.role, args.out)
    for path in paths:
        print(path)
    return 0


def cmd_pseudoseg(args) -> int:
    recording = parse_session(args.session_dir)
    study = load_study(resolve_study(args.study_dir))
    path, conflicts = write_pseudo_seg_artifact(recording, study.pet, args.role, args.out)
    print(path)
    if conflicts:
        print(f"warning: {conflicts} overlap conflict(s), later acceptance kept")
    return 0


def cmd_mip(args) -> int:
    study = load_study(resolve_study(args.study_dir))
    stack = mip_stack(study.pet)
    data = np.stack([p.astype(np.float32) for p in stack.projections], axis=2)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_volume(ScalarVolume(data, (1.0, 1.0, 1.0), Modality.PET_SUV), out)
    print(f"{out} (12 angles, global max {stack.global_max:.4g})")
    return 0


def cmd_export_coco(args) -> int:
    import csv

    root = data_root(args.data_root)
    metadata = root / "metadata.csv"
    if not metadata.exists():
        raise GazebenchError(f"no metadata.csv under {root}")
    role_map = {}
    if args.role_map:
        role_map = {
            k: str(v) for k, v in json.loads(Path(args.role_map).read_text()).items()
        }
    reads = []
    with open(metadata, newline="") as fh:
        for row in csv.DictReader(fh):
            session_dir = root / "gaze_data" / row["observer_id"] / row["study_path"]
            reads.append(
                StudyRead(
                    study_path=row["study_path"],
                    observer_id=row["observer_id"],
                    reader_role=role_map.get(row["observer_id"], "trainee"),
                    recording=parse_session(session_dir),
                )
            )

    cache = {}

    def pet_resolver(study_path):
        if study_path not in cache:
            try:
                cache[study_path] = load_study(resolve_study(study_path, root)).pet
            except FileNotFoundError:
                cache[study_path] = None
        return cache[study_path]

    paths = export_coco(reads, args.out, args.seed, pet_resolver)
    problems = validate_export(args.out)
    if problems:
        for problem in problems:
            print(f"integrity: {problem}", file=sys.stderr)
        return 1
    for name, digest in export_checksums(args.out).items():
        print(f"{digest}  {name}")
    return 0


def _write_report(out: str, table_rows, doc: dict) -> None:
    """JSON by default; a .csv suffix writes the table layout instead."""
    import csv

    path = Path(out)
    if path.suffix == ".csv":
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows(table_rows)
    else:
        path.write_text(json.dumps(doc, indent=2) + "\n")
    print(f"written {path}")


def cmd_calib(args) -> int:
    recording = parse_session(args.session_dir)
    geom = _geometry_from(args.geometry)
    report = calibration_metrics(recording, geom)
    _print_table(report.table_rows())
    if args.out:
        _write_report(args.out, report.table_rows(), report.to_dict())
    return 0


def cmd_agree(args) -> int:
    sets = {}
    for session_dir in args.sets:
        name = Path(session_dir).name or str(session_dir)
        while name in sets:
            name += "'"
        sets[name] = parse_session(session_dir).lesions
    report = agreement_report(sets, method=args.method)
    _print_table(report.table_rows())
    if args.out:
        _write_report(args.out, report.table_rows(), report.to_dict())
    return 0


def cmd_eval_gaze_correction(args) -> int:
    doc = json.loads(Path(args.cases).read_text())
    geom = ViewingGeometry(**doc["geometry"]) if "geometry" in doc else ViewingGeometry()
    cases = [
        GazeCorrectionCase(
            predicted_px=tuple(c["predicted_px"]),
            last_gaze_px=tuple(c["last_gaze_px"]),
            mask_pixels_px=tuple(tuple(p) for p in c["mask_pixels_px"]),
            origin_mm=tuple(c.get("origin_mm", (0.0, 0.0, 650.0))),
        )
        for c in doc["cases"]
    ]
    result = gaze_correction_eval(cases, geom)
    print(f"on_mask: {result.on_mask_pct * 100:.2f}%")
    print(f"improved: {result.improved_pct * 100:.2f}%")
    print(f"mean_angle: {result.mean_angle_deg:.4f} deg")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gazebench",
        description="Gaze-assisted PET/CT annotation workbench tools",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phantom", help="generate a synthetic phantom study")
    p.add_argument("--spec", required=True, help="phantom spec JSON")
    p.add_argument("--out", required=True, help="output study directory")
    p.set_defaults(fn=cmd_phantom)

    p = sub.add_parser("serve", help="run the annotation gateway service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--data-root", default=None, help=f"defaults to ${DATA_ROOT_ENV}")
    p.add_argument("--config", default=None, help="JSON with policy knobs / monitor")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("replay", help="verify a session replays exactly")
    p.add_argument("session_dir")
    p.add_argument("study_dir")
    p.set_defaults(fn=cmd_replay)

    p = sub.add_parser("heatmap", help="write gaze heatmap volume + MIP")
    p.add_argument("session_dir")
    p.add_argument("study_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--role", default="trainee", choices=("trainee", "experienced"))
    p.set_defaults(fn=cmd_heatmap)

    p = sub.add_parser("pseudoseg", help="write the pseudo-segmentation volume")
    p.add_argument("session_dir")
    p.add_argument("study_dir")
    p.add_argument("--out", required=True)
    p.add_argument("--role", default="trainee", choices=("trainee", "experienced"))
    p.set_defaults(fn=cmd_pseudoseg)

    p = sub.add_parser("mip", help="write the 12-angle PET MIP stack")
    p.add_argument("study_dir")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_mip)

    p = sub.add_parser("export-coco", help="export COCO-style JSONs and gaze CSVs")
    p.add_argument("--data-root", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--role-map", default=None, help="JSON {observer_id: role}")
    p.set_defaults(fn=cmd_export_coco)

    p = sub.add_parser("calib", help="gaze calibration accuracy/precision report")
    p.add_argument("session_dir")
    p.add_argument("--geometry", default=None, help="geometry JSON file")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_calib)

    p = sub.add_parser("agree", help="inter-annotator agreement between sessions")
    p.add_argument("sets", nargs="+", help="two or three session directories")
    p.add_argument("--method", default="greedy", choices=("greedy", "optimal"))
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_agree)

    p = sub.add_parser("eval-gaze-correction", help="score predicted gaze points")
    p.add_argument("cases", help="JSON file with cases (and optional geometry)")
    p.set_defaults(fn=cmd_eval_gaze_correction)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "sets", None) is not None and not 2 <= len(args.sets) <= 3:
        parser.error("agree takes two or three session directories")
    try:
        return args.fn(args)
    except (GazebenchError, FileNotFoundError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
