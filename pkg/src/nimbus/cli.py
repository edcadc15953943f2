"""Command-line entry point: ``nimbus {ghi,index,calibrate,detect,simulate}``.

Option values resolve as flags > config file > environment > defaults. The
config file is JSON with one object per subcommand (and an optional
``"common"`` object); its path comes from ``--config`` or ``NIMBUS_CONFIG``.
Environment overrides use ``NIMBUS_<OPTION>``, e.g. ``NIMBUS_THRESHOLD``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from datetime import date, datetime, time, timedelta
from pathlib import Path

import numpy as np

from nimbus import constants as C
from nimbus.calibration import (
    build_events,
    empirical_cdf,
    oc_counts,
    select_elbow,
    threshold_grid,
    window_mask,
    OcPoint,
)
from nimbus.errors import ConfigError, IngestionError, NimbusError
from nimbus.index import DetectionConfig
from nimbus.ingest import (
    DEFAULT_PATTERN,
    Dataset,
    align,
    format_timestamp,
    parse_gauge_csv,
    parse_luminance_csv,
    parse_timestamp,
    scan_images,
    tz,
)
from nimbus.luminance import LuminanceCalibration, fit_calibration
from nimbus.pipeline import build_index_table, measure_images
from nimbus.solar import GeoLocation, ghi_series
from nimbus.synth import ScenarioConfig, generate, write_dataset

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CALIBRATION = 0, 2, 3, 4


def _num(x) -> str:
    return repr(float(x))


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temp file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write(out, text)


def _csv(header, rows) -> str:
    return "\n".join([",".join(header)] + [",".join(r) for r in rows]) + "\n"


# -- option resolution ------------------------------------------------------

# dest -> (converter, default)
SHARED_OPTS = {
    "lat": (float, None),
    "lon": (float, None),
    "tz_offset_min": (int, None),
    "pattern": (str, None),
    "crop_side": (int, None),
    "crop_fraction": (float, None),
    "daylight_max_zenith": (float, C.DAYLIGHT_MAX_ZENITH),
}
OPTS = {
    "ghi": {
        "lat": (float, C.NTU_LATITUDE),
        "lon": (float, C.NTU_LONGITUDE),
        "date": (date.fromisoformat, None),
        "step_minutes": (float, float(C.CAPTURE_INTERVAL_MIN)),
        "tz_offset_min": (int, 0),
        "out": (str, None),
    },
    "index": {**SHARED_OPTS, "out": (str, None)},
    "detect": {**SHARED_OPTS, "threshold": (float, C.CRITICAL_INDEX), "out": (str, None)},
    "calibrate": {
        **SHARED_OPTS,
        "window_min": (float, C.RAIN_WINDOW_MIN),
        "merge_gap_min": (float, C.EVENT_MERGE_GAP_MIN),
        "align_tolerance_s": (float, C.ALIGN_TOLERANCE_S),
        "grid_start": (float, C.GRID_START),
        "grid_end": (float, C.GRID_END),
        "grid_step": (float, C.GRID_STEP),
        "out_dir": (str, None),
    },
    "simulate": {
        "date": (date.fromisoformat, date(2015, 12, 11)),
        "lat": (float, C.NTU_LATITUDE),
        "lon": (float, C.NTU_LONGITUDE),
        "tz_offset_min": (int, C.SINGAPORE_TZ_OFFSET_MIN),
        "n_events": (int, 3),
        "event_minutes": (int, 30),
        "clear_level": (float, 1.0),
        "rain_level": (float, 0.02),
        "v_ramp_minutes": (float, 240.0),
        "noise_sigma": (float, 0.0),
        "seed": (int, 0),
        "image_size": (int, 64),
        "format": (str, "images"),
        "out": (str, None),
    },
}


def _load_config(path):
    if not path:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return data


def resolve(args: argparse.Namespace, environ=None) -> argparse.Namespace:
    """Fill unset options from the config file, then the environment, then defaults."""
    environ = os.environ if environ is None else environ
    cfg = _load_config(args.config or environ.get("NIMBUS_CONFIG"))
    section = {**cfg.get("common", {}), **cfg.get(args.command, {})}
    for dest, (conv, default) in OPTS[args.command].items():
        if getattr(args, dest, None) is not None:
            continue
        raw, origin = None, None
        if dest in section:
            raw, origin = section[dest], "config file"
        elif f"NIMBUS_{dest.upper()}" in environ:
            raw, origin = environ[f"NIMBUS_{dest.upper()}"], f"NIMBUS_{dest.upper()}"
        if raw is None:
            setattr(args, dest, default)
            continue
        try:
            setattr(args, dest, conv(raw))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value {raw!r} for {dest} from {origin}: {exc}") from exc
    return args


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _add_source(p: argparse.ArgumentParser, gauge: bool = False) -> None:
    p.add_argument("--dataset", help="dataset directory or manifest.json")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--images", help="directory of timestamped sky images")
    src.add_argument("--luminance", help="CSV of timestamp,l_m instead of images")
    if gauge:
        p.add_argument("--gauge", help="rain gauge CSV (timestamp,rain_mm_per_hr)")
    p.add_argument("--calibration", help="JSON file with alpha (and optional beta)")
    p.add_argument("--lat", type=float)
    p.add_argument("--lon", type=float)
    p.add_argument("--tz-offset-min", type=int, help="offset of file-name times from UTC")
    p.add_argument("--pattern", help=f"file-name timestamp format (default {DEFAULT_PATTERN.replace('%', '%%')})")
    crop = p.add_mutually_exclusive_group()
    crop.add_argument("--crop-side", type=int, help=f"crop square side (default {C.DEFAULT_CROP_SIDE})")
    crop.add_argument("--crop-fraction", type=float, help="crop side as a fraction of the short edge")
    p.add_argument("--daylight-max-zenith", type=float)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nimbus", description="Rainfall onset detection from sky-camera luminance.")
    parser.add_argument("--config", help="JSON config file (default: $NIMBUS_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ghi", help="clear-sky GHI over one day")
    p.add_argument("--lat", type=float)
    p.add_argument("--lon", type=float)
    p.add_argument("--date", type=date.fromisoformat, help="YYYY-MM-DD")
    p.add_argument("--step-minutes", type=float)
    p.add_argument("--tz-offset-min", type=int, help="local offset defining the day and output times")
    p.add_argument("--out")

    p = sub.add_parser("index", help="clearness luminance index per image")
    _add_source(p)
    p.add_argument("--out")

    p = sub.add_parser("detect", help="flag images whose index falls below the threshold")
    _add_source(p)
    p.add_argument("--threshold", type=float)
    p.add_argument("--out")

    p = sub.add_parser("calibrate", help="CDFs, OC curve and elbow threshold")
    _add_source(p, gauge=True)
    p.add_argument("--clear-intervals", help="CSV start,end of clear-sky periods to fit the "
                                             "luminance calibration on")
    p.add_argument("--affine", action="store_true", help="fit an offset as well as a scale")
    p.add_argument("--window-min", type=float)
    p.add_argument("--merge-gap-min", type=float)
    p.add_argument("--align-tolerance-s", type=float)
    p.add_argument("--grid-start", type=float)
    p.add_argument("--grid-end", type=float)
    p.add_argument("--grid-step", type=float)
    p.add_argument("--out-dir")

    p = sub.add_parser("simulate", help="write a synthetic dataset with planted rain events")
    p.add_argument("--date", type=date.fromisoformat)
    p.add_argument("--lat", type=float)
    p.add_argument("--lon", type=float)
    p.add_argument("--tz-offset-min", type=int)
    p.add_argument("--n-events", type=int)
    p.add_argument("--event-minutes", type=int)
    p.add_argument("--clear-level", type=float)
    p.add_argument("--rain-level", type=float)
    p.add_argument("--v-ramp-minutes", type=float)
    p.add_argument("--noise-sigma", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--image-size", type=int)
    p.add_argument("--format", choices=("images", "csv"))
    p.add_argument("--out", help="output directory")
    return parser


# -- shared input loading ---------------------------------------------------

class Source:
    """Resolved inputs for index/detect/calibrate."""

    def __init__(self, args):
        ds = Dataset.load(args.dataset) if args.dataset else None
        root = Path(args.dataset) if args.dataset else None
        if root is not None and root.is_file():
            root = root.parent
        self.dataset = ds

        lat = args.lat if args.lat is not None else (ds.location.latitude if ds else None)
        lon = args.lon if args.lon is not None else (ds.location.longitude if ds else None)
        if lat is None or lon is None:
            raise ConfigError("location required: give --lat and --lon or --dataset")
        self.location = GeoLocation(lat, lon)
        self.tz_offset_min = (args.tz_offset_min if args.tz_offset_min is not None
                              else (ds.tz_offset_min if ds else 0))
        self.pattern = args.pattern or (ds.pattern if ds else DEFAULT_PATTERN)
        if args.crop_side is not None or args.crop_fraction is not None:
            self.crop_side, self.crop_fraction = args.crop_side, args.crop_fraction
        else:
            self.crop_side = ds.crop_side if ds else None
            self.crop_fraction = ds.crop_fraction if ds else None

        self.images = Path(args.images) if args.images else None
        self.luminance = Path(args.luminance) if args.luminance else None
        if self.images is None and self.luminance is None and ds is not None:
            if ds.images_dir:
                self.images = root / ds.images_dir
            elif ds.luminance_file:
                self.luminance = root / ds.luminance_file
        if self.images is None and self.luminance is None:
            raise ConfigError("no input: give --images, --luminance or --dataset")

        gauge = getattr(args, "gauge", None)
        self.gauge = Path(gauge) if gauge else (root / ds.gauge_file if ds and ds.gauge_file else None)

        if args.calibration:
            try:
                self.calibration = LuminanceCalibration.from_dict(
                    json.loads(Path(args.calibration).read_text()))
            except (OSError, ValueError, KeyError) as exc:
                raise IngestionError(f"cannot read calibration {args.calibration}: {exc}") from exc
        else:
            self.calibration = ds.calibration if ds else None

    def measurements(self) -> tuple[np.ndarray, np.ndarray]:
        if self.images is not None:
            refs, skipped = scan_images(self.images, self.pattern, self.tz_offset_min)
            if skipped:
                print(f"ingest: skipped {len(skipped)} file(s) without a parseable timestamp",
                      file=sys.stderr)
            epoch = np.array([r.timestamp.timestamp() for r in refs])
            return epoch, measure_images(refs, self.crop_side, self.crop_fraction)
        times, l_m = parse_luminance_csv(self.luminance)
        return np.array([t.timestamp() for t in times]), l_m

    def fmt(self, epoch_s: float) -> str:
        return format_timestamp(datetime.fromtimestamp(float(epoch_s), tz(0)), self.tz_offset_min)


# -- subcommands ------------------------------------------------------------

def cmd_ghi(args) -> int:
    if args.date is None:
        raise ConfigError("ghi needs --date YYYY-MM-DD")
    if not args.step_minutes > 0:
        raise ConfigError("--step-minutes must be positive")
    loc = GeoLocation(args.lat, args.lon)
    start = datetime.combine(args.date, time(0, 0), tzinfo=tz(args.tz_offset_min))
    n = int(np.floor(24 * 60 / args.step_minutes + 1e-9))
    times = [start + timedelta(minutes=k * args.step_minutes) for k in range(n)]
    zen, e0, ghi = ghi_series(loc, np.array([t.timestamp() for t in times]))
    rows = [(t.isoformat(), _num(z), _num(e), _num(g)) for t, z, e, g in zip(times, zen, e0, ghi)]
    emit(_csv(["timestamp", "zenith_deg", "e0", "ghi_wm2"], rows), args.out)
    return EXIT_OK


def _table(src: Source, args):
    epoch, l_m = src.measurements()
    return build_index_table(epoch, l_m, src.location, src.calibration, args.daylight_max_zenith)


def cmd_index(args) -> int:
    src = Source(args)
    tab = _table(src, args)
    rows = [(src.fmt(t), _num(a), _num(g), _num(c), _num(i))
            for t, a, g, c, i in zip(tab.epoch_s, tab.l_m, tab.g_c, tab.l_c, tab.index)]
    emit(_csv(["timestamp", "l_m", "g_c", "l_c", "index"], rows), args.out)
    return EXIT_OK


def cmd_detect(args) -> int:
    cfg = DetectionConfig(args.threshold, args.daylight_max_zenith)
    src = Source(args)
    tab = _table(src, args)
    flags = tab.index < cfg.critical_index
    rows = [(src.fmt(t), _num(i), "1" if f else "0") for t, i, f in zip(tab.epoch_s, tab.index, flags)]
    emit(_csv(["timestamp", "index", "onset_flag"], rows), args.out)
    print(f"detect: samples={len(tab)} onset={int(flags.sum())} clear={int((~flags).sum())} "
          f"threshold={cfg.critical_index!r}", file=sys.stderr)
    return EXIT_OK


def _read_intervals(path):
    text = Path(path).read_text().strip().splitlines()
    if not text or [h.strip() for h in text[0].split(",")] != ["start", "end"]:
        raise IngestionError(f"{path}: expected header start,end")
    out = []
    for k, line in enumerate(text[1:], start=2):
        try:
            a, b = line.split(",")
            out.append((parse_timestamp(a).timestamp(), parse_timestamp(b).timestamp()))
        except ValueError as exc:
            raise IngestionError(f"{path}:{k}: {exc}") from exc
    return out


def cmd_calibrate(args) -> int:
    if not args.out_dir:
        raise ConfigError("calibrate needs --out-dir")
    if args.window_min < 0:
        raise ConfigError("--window-min must be non-negative")
    grid = threshold_grid(args.grid_start, args.grid_end, args.grid_step)
    src = Source(args)
    if src.gauge is None:
        raise ConfigError("calibrate needs --gauge or a dataset with a gauge file")
    gauge = parse_gauge_csv(src.gauge)
    epoch, l_m = src.measurements()

    if args.clear_intervals:
        _, _, g_all = ghi_series(src.location, epoch)
        inside = np.zeros(epoch.shape, dtype=bool)
        for a, b in _read_intervals(args.clear_intervals):
            inside |= (epoch >= a) & (epoch <= b)
        inside &= g_all > 0
        src.calibration = fit_calibration(zip(g_all[inside], l_m[inside]), affine=args.affine)

    tab = build_index_table(epoch, l_m, src.location, src.calibration, args.daylight_max_zenith)
    matched = align(tab.epoch_s, [r.timestamp for r in gauge], args.align_tolerance_s).matched
    tab = tab.select(matched)
    events = build_events(gauge, args.merge_gap_min)
    within = window_mask(tab.epoch_s, events, args.window_min)

    n_in, n_out, c_in, c_out = oc_counts(tab.index, within, grid)
    curve = [OcPoint(float(t), 100.0 * int(a) / n_in, 100.0 * int(b) / n_out)
             for t, a, b in zip(grid, c_in, c_out)]
    selected = select_elbow(curve)

    cdf_in, cdf_out = empirical_cdf(tab.index[within]), empirical_cdf(tab.index[~within])
    xs = np.unique(tab.index)
    out = Path(args.out_dir)
    atomic_write(out / "cdf.csv", _csv(["x", "cdf_within", "cdf_outside"],
                                       [(_num(x), _num(cdf_in(x)), _num(cdf_out(x))) for x in xs]))
    atomic_write(out / "oc.csv", _csv(["threshold", "pct_within_below", "pct_outside_below"],
                                      [(_num(p.threshold), _num(p.pct_within_below),
                                        _num(p.pct_outside_below)) for p in curve]))
    atomic_write(out / "luminance_calibration.json",
                 json.dumps(tab.calibration.to_dict(), indent=2, sort_keys=True) + "\n")
    summary = {"selected_threshold": selected, "n_within": n_in, "n_outside": n_out}
    atomic_write(out / "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if not args.out:
        raise ConfigError("simulate needs --out DIR")
    cfg = ScenarioConfig(
        day=args.date,
        location=GeoLocation(args.lat, args.lon),
        tz_offset_min=args.tz_offset_min,
        n_events=args.n_events,
        event_minutes=(args.event_minutes,),
        clear_index_level=args.clear_level,
        rain_index_level=args.rain_level,
        v_ramp_minutes=args.v_ramp_minutes,
        noise_sigma=args.noise_sigma,
        seed=args.seed,
        image_size=args.image_size,
    )
    day = generate(cfg)
    write_dataset(day, args.out, args.format)
    print(f"simulate: images={len(day.image_times)} events={len(day.events)} out={args.out}",
          file=sys.stderr)
    return EXIT_OK


COMMANDS = {"ghi": cmd_ghi, "index": cmd_index, "detect": cmd_detect,
            "calibrate": cmd_calibrate, "simulate": cmd_simulate}


def _origin(exc: Exception, fallback: str) -> str:
    tb = exc.__traceback__
    name = None
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", name)
        tb = tb.tb_next
    if name and name.startswith("nimbus.") and fallback == "nimbus":
        return name.split(".")[1].lstrip("_")
    return fallback


def _fail(exc: Exception, code: int, module: str) -> int:
    line = {"error": str(exc).replace("\n", " "), "module": module, "exit_code": code}
    print(json.dumps(line, sort_keys=True), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = resolve(parser.parse_args(argv))
        return COMMANDS[args.command](args)
    except NimbusError as exc:
        return _fail(exc, exc.exit_code, _origin(exc, exc.module))
    except OSError as exc:
        return _fail(exc, EXIT_DATA, "io")


if __name__ == "__main__":
    sys.exit(main())
