"""Command-line entry point: ``anpr synth | train | recognize | evaluate``.

Exit codes follow sysexits: 0 success, 2 no plate found, 64 bad usage or
configuration, 65 malformed input data, 66 missing input file, 70
internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import List, Optional

import numpy as np
from joblib import Parallel, delayed

from .classify.forest import RandomForestGlyphClassifier
from .classify.knn import KnnGlyphClassifier
from .classify.serialize import ModelFormatError, load_model, save_model
from .image import BinaryImage, NetpbmError, RgbImage, read_netpbm, write_netpbm
from .pipeline import (
    ConfigError,
    PipelineConfig,
    apply_overrides,
    character_accuracy,
    load_config,
    recognize,
    score_reading,
)

EXIT_OK = 0
EXIT_NO_PLATE = 2
EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_NO_INPUT = 66
EXIT_SOFTWARE = 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _existing(path: str, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise FileNotFoundError(f"{what} not found: {path}")
    return p


# --- synth -----------------------------------------------------------------


def cmd_synth(args) -> int:
    from .dataset import (
        AugmentSpec,
        build_split,
        load_atlas,
        random_scene_spec,
        render_scene,
        scale_counts,
        write_glyphs,
        write_scene,
    )

    out = Path(args.out)
    atlas = load_atlas(args.atlas)
    counts = scale_counts(args.per_class)
    split = build_split(atlas, counts, AugmentSpec(), seed=args.seed, specials=args.specials)
    n_glyphs = write_glyphs(out, split)
    rng = np.random.default_rng([args.seed, 1])
    for i in range(args.scenes):
        spec = random_scene_spec(rng, atlas, clutter=args.clutter, special_p=args.special_rate)
        image, truth = render_scene(atlas, spec)
        write_scene(out, f"scene-{i:04d}", image, truth)
    print(f"wrote {n_glyphs} glyphs ({'/'.join(map(str, counts))} per class) and {args.scenes} scenes to {out}")
    return EXIT_OK


# --- train -----------------------------------------------------------------


def cmd_train(args) -> int:
    from .dataset import CalibrationError, calibrate_thresholds, read_glyphs

    data = _existing(args.data, "data directory")
    train, _ = read_glyphs(data, "train")
    if not train:
        raise UsageError(f"no training glyphs under {data / 'glyphs'}")
    X = np.stack([g.pixels.reshape(-1) for g in train])
    y = [g.label for g in train]
    if args.classifier == "forest":
        model = RandomForestGlyphClassifier(n_trees=args.trees, seed=args.seed, n_jobs=args.jobs)
    else:
        model = KnnGlyphClassifier(k=args.k)
    start = time.perf_counter()
    model.fit(X, y)
    elapsed = time.perf_counter() - start

    out = Path(args.out)
    report_text = "not calibrated: default thresholds kept\n"
    if not args.no_calibrate:
        validation, _ = read_glyphs(data, "validation")
        if not validation:
            raise CalibrationError("no validation glyphs to calibrate on (use --no-calibrate)")
        Xv = np.stack([g.pixels.reshape(-1) for g in validation])
        th, report = calibrate_thresholds(model, Xv, [g.label for g in validation])
        model.set_params(thresholds=th)
        report_text = report.to_text()
        if not report.feasible:
            _err("warning: calibration could not reach the special-glyph rejection target")
    save_model(model, out)
    report_path = out.with_name(out.name + ".calibration.txt")
    report_path.write_text(report_text, encoding="ascii")
    print(f"trained {args.classifier} on {len(y)} glyphs in {elapsed:.1f} s -> {out}")
    print(report_text, end="")
    return EXIT_OK


# --- recognize -------------------------------------------------------------


def _config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config(_existing(args.config, "config file"), cfg)
    overrides = {}
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        overrides[key] = value
    return apply_overrides(cfg, overrides) if overrides else cfg


def _read_image(path: str):
    img = read_netpbm(_existing(path, "image"))
    if isinstance(img, BinaryImage):
        img = img.to_gray()
    return img


def _overlay(gray, reading) -> RgbImage:
    rgb = np.repeat(gray.data[:, :, None], 3, axis=2).copy()

    def outline(box, color):
        x0, y0, x1, y1 = box.x, box.y, box.x2 - 1, box.y2 - 1
        rgb[y0, x0 : x1 + 1] = rgb[y1, x0 : x1 + 1] = color
        rgb[y0 : y1 + 1, x0] = rgb[y0 : y1 + 1, x1] = color

    if reading.plate_box is not None:
        outline(reading.plate_box, (255, 0, 0))
    for c in reading.per_char:
        outline(c.box, (0, 200, 0) if c.prediction.accepted else (255, 160, 0))
    return RgbImage(rgb)


def _write_debug(folder: Path, stem: str, debug: dict, reading) -> None:
    folder.mkdir(parents=True, exist_ok=True)
    for stage, value in debug.items():
        if isinstance(value, BinaryImage):
            write_netpbm(value, folder / f"{stem}.{stage}.pbm")
        elif hasattr(value, "to_text"):
            (folder / f"{stem}.{stage}.txt").write_text(value.to_text() + "\n", encoding="ascii")
        elif hasattr(value, "data") and hasattr(value, "width"):
            write_netpbm(value, folder / f"{stem}.{stage}.pgm")
    gray = debug.get("gray")
    if gray is not None:
        write_netpbm(_overlay(gray, reading), folder / f"{stem}.overlay.ppm")
    (folder / f"{stem}.reading.txt").write_text(reading.to_json() + "\n", encoding="ascii")


def cmd_recognize(args) -> int:
    cfg = _config(args)
    model = load_model(_existing(args.model, "model file"))
    image = _read_image(args.image)
    debug = {} if args.debug else None
    reading = recognize(image, model, cfg, debug)
    if args.debug:
        _write_debug(Path(args.debug), Path(args.image).stem, debug, reading)
    if args.json:
        print(reading.to_json(timings=args.timings))
    elif reading.found:
        print(reading.text)
        if args.timings:
            _err(" ".join(f"{k}={v:.1f}ms" for k, v in reading.timings.items()))
    if not reading.found:
        _err("no plate found")
        return EXIT_NO_PLATE
    return EXIT_OK


# --- evaluate --------------------------------------------------------------


def _model_name(model) -> str:
    return "RF" if isinstance(model, RandomForestGlyphClassifier) else "kNN"


def _evaluate_one(model, cfg, path):
    from .dataset import read_scene

    image, truth = read_scene(path)
    start = time.perf_counter()
    reading = recognize(image, model, cfg)
    elapsed = time.perf_counter() - start
    return score_reading(reading, truth), elapsed, reading.text == truth.text


def cmd_evaluate(args) -> int:
    from .dataset import list_scenes

    cfg = _config(args)
    data = _existing(args.data, "data directory")
    scenes = list_scenes(data)
    if args.limit:
        scenes = scenes[: args.limit]
    if not scenes:
        raise UsageError(f"no scenes with truth files under {data / 'scenes'}")
    paths = [p for p in (s.strip() for s in args.models.split(",")) if p]
    if not paths:
        raise UsageError("--models needs at least one model file")
    models = [(p, load_model(_existing(p, "model file"))) for p in paths]
    names = [_model_name(m) for _, m in models]
    rows = []
    for (path, model), name in zip(models, names):
        if names.count(name) > 1:
            name = f"{name} ({Path(path).name})"
        results = Parallel(n_jobs=args.jobs, prefer="threads")(
            delayed(_evaluate_one)(model, cfg, s) for s in scenes
        )
        rows.append(
            {
                "classifier": name,
                "model": str(path),
                "accuracy": character_accuracy(r[0] for r in results),
                "plates_exact": sum(r[2] for r in results) / len(results),
                "seconds_per_image": sum(r[1] for r in results) / len(results),
                "images": len(results),
            }
        )
    if args.json:
        print(json.dumps({"data": str(data), "results": rows}, sort_keys=True))
    else:
        width = max(len("Classifier"), *(len(r["classifier"]) for r in rows))
        print(f"{'Classifier':<{width}} | Accuracy | s/image")
        for r in rows:
            print(f"{r['classifier']:<{width}} | {100 * r['accuracy']:7.2f}% | {r['seconds_per_image']:.3f}")
    return EXIT_OK


# --- argument parsing ------------------------------------------------------


def _positive(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return n


def _non_negative(value: str) -> int:
    n = int(value)
    if n < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return n


def _fraction(value: str) -> float:
    p = float(value)
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError("must lie in [0, 1]")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="anpr", description="Number-plate recognition from synthetic or real scenes.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth", help="write a synthetic glyph and scene dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--per-class", type=_positive, default=350, help="glyphs per class across all splits")
    p.add_argument("--scenes", type=_non_negative, default=100, help="number of scenes")
    p.add_argument("--seed", type=_non_negative, default=0)
    p.add_argument("--specials", type=_non_negative, default=60,
                   help="special glyphs of each kind in validation and test")
    p.add_argument("--special-rate", type=_fraction, default=0.2,
                   help="probability that a scene plate carries a special symbol")
    p.add_argument("--clutter", type=_fraction, default=0.5)
    p.add_argument("--atlas", default=None, help="directory of <SYMBOL>.pbm bitmaps (default: bundled)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a glyph classifier and calibrate its thresholds")
    p.add_argument("--data", required=True, help="dataset directory")
    p.add_argument("--classifier", choices=("forest", "knn"), default="forest")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--trees", type=_positive, default=100)
    p.add_argument("--k", type=_positive, default=3)
    p.add_argument("--seed", type=_non_negative, default=0)
    p.add_argument("--jobs", type=int, default=None, help="parallel tree builders (result is identical)")
    p.add_argument("--no-calibrate", action="store_true", help="keep default rejection thresholds")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("recognize", help="read the plate in one image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True, help="PGM, PPM or PBM image")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one configuration value")
    p.add_argument("--debug", metavar="DIR", help="write intermediate images to DIR")
    p.add_argument("--json", action="store_true", help="print the reading as JSON")
    p.add_argument("--timings", action="store_true", help="report per-stage timings")
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("evaluate", help="character accuracy and latency over a scene set")
    p.add_argument("--models", required=True, help="comma-separated model files")
    p.add_argument("--data", required=True, help="dataset directory with scenes/")
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.add_argument("--jobs", type=int, default=None, help="images processed concurrently")
    p.add_argument("--limit", type=_non_negative, default=0, help="evaluate only the first N scenes")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_evaluate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        _err(f"anpr {args.command}: {exc}")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _err(f"anpr {args.command}: {exc}")
        return EXIT_NO_INPUT
    except (ModelFormatError, NetpbmError, ValueError) as exc:
        _err(f"anpr {args.command}: {exc}")
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort report
        _err(f"anpr {args.command}: internal error: {type(exc).__name__}: {exc}")
        return EXIT_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
