"""Command-line entry point.

Subcommands::

    simulate    synthetic fleet -> measurements.csv + carriers.csv
    signatures  measurements -> signature CSV
    distances   signatures -> all-pairs distance CSV
    identify    signatures + interferer id -> ranked JSON report
    evaluate    distances + census -> performance JSON (+ histogram CSV)

Outputs are canonically ordered and formatted, so identical inputs give
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Optional, Sequence

from . import io, simgen
from .encoding import Encoding
from .errors import (
    CarrierSigError,
    CoverageError,
    InsufficientDataError,
    UnknownCarrierError,
)
from .matching import DEFAULT_THRESHOLD, pair_distances, rank_candidates
from .signature import DEFAULT_PERIOD, MIN_PERIODS, compute_signature, samples_per_period
from .stats import DEFAULT_BIN_WIDTH, AntennaCensus, count_pairs, evaluate
from .timeseries import (
    DEFAULT_INTERVAL,
    DEFAULT_MAX_GAP,
    DEFAULT_SIGMA,
    format_timestamp,
    gaussian_detrend,
    parse_timestamp,
    resample_samples,
)

log = logging.getLogger("carriersig")

DEFAULTS = {
    "interval_minutes": DEFAULT_INTERVAL.total_seconds() / 60,
    "window_sigma_hours": DEFAULT_SIGMA.total_seconds() / 3600,
    "max_gap_hours": DEFAULT_MAX_GAP.total_seconds() / 3600,
    "period_hours": DEFAULT_PERIOD.total_seconds() / 3600,
    "encoding": Encoding.AMPLITUDE.value,
    "threshold": DEFAULT_THRESHOLD,
    "bin_width": DEFAULT_BIN_WIDTH,
    "seed": 42,
}


def _positive(text: str) -> float:
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return value


def _unit(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"expected a value in [0, 1], got {text!r}")
    return value


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--interval-minutes", type=_positive, help="resampling grid step (default 3)")
    g.add_argument("--window-sigma-hours", type=_positive, help="detrending window std (default 6)")
    g.add_argument("--max-gap-hours", type=_positive, help="largest tolerated measurement gap (default 2)")
    g.add_argument("--period-hours", type=_positive, help="period length (default 24)")
    g.add_argument("--encoding", choices=[e.value for e in Encoding], help="state encoding (default amplitude)")
    g.add_argument("--threshold", type=_unit, help="result-set threshold D_t (default 0.4)")
    g.add_argument("--bin-width", type=_positive, help="histogram bin width (default 0.05)")
    g.add_argument("--seed", type=int, help="simulation seed (default 42)")
    g.add_argument("--include-other-satellites", action="store_true",
                   help="compare carriers relayed by different satellites")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _global_flags()
    parser = argparse.ArgumentParser(prog="carriersig", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic fleet")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--config", type=Path, help="key = value fleet config file")
    p.add_argument("--days", type=_positive)
    p.add_argument("--census", help="k:n list, e.g. 1:27,2:1,3:1,6:2,9:1")
    p.add_argument("--diurnal-db", type=float)
    p.add_argument("--antenna-db", type=float)
    p.add_argument("--carrier-db", type=float)
    p.add_argument("--antenna-tau-hours", type=_positive)
    p.add_argument("--satellites", type=int)

    p = sub.add_parser("signatures", parents=[common], help="compute carrier signatures")
    p.add_argument("--measurements", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--start", help="analysis period start, ISO 8601 UTC")
    p.add_argument("--end", help="analysis period end (exclusive), ISO 8601 UTC")
    p.add_argument("--snr-min-db", type=float, default=3.0,
                   help="drop rows below this SNR when an snr_db column exists (default 3)")
    p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")

    p = sub.add_parser("distances", parents=[common], help="all-pairs signature distances")
    p.add_argument("--signatures", type=Path, required=True)
    p.add_argument("--carriers", type=Path, help="carrier_id,antenna_id[,satellite_id] CSV")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("identify", parents=[common], help="rank known carriers against an interferer")
    p.add_argument("--signatures", type=Path, required=True)
    p.add_argument("--interferer", required=True)
    p.add_argument("--carriers", type=Path)
    p.add_argument("--out", type=Path, help="report path (default stdout)")

    p = sub.add_parser("evaluate", parents=[common], help="performance estimates from distances")
    p.add_argument("--distances", type=Path, required=True)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--carriers", type=Path)
    src.add_argument("--census", help="k:n list instead of a carriers file")
    p.add_argument("--out", type=Path, help="report path (default stdout)")
    p.add_argument("--histogram", type=Path, help="write bin_lo,bin_hi,count_same,count_different")
    return parser


def _opt(args, name):
    value = getattr(args, name, None)
    return DEFAULTS[name] if value is None else value


def _config_echo(args, keys: Sequence[str], **extra) -> dict:
    out = {"command": args.command}
    for k in keys:
        out[k] = _opt(args, k)
    for k, v in extra.items():
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _emit_json(path: Optional[Path], payload: dict) -> None:
    if path is None:
        json.dump(payload, sys.stdout, indent=2)
        sys.stdout.write("\n")
    else:
        io.write_json(path, payload)


def cmd_simulate(args) -> int:
    overrides = {
        "census": AntennaCensus.parse(args.census) if args.census else None,
        "duration": timedelta(days=args.days) if args.days else None,
        "interval": timedelta(minutes=args.interval_minutes) if args.interval_minutes else None,
        "diurnal_db": args.diurnal_db,
        "antenna_db": args.antenna_db,
        "carrier_db": args.carrier_db,
        "antenna_tau": timedelta(hours=args.antenna_tau_hours) if args.antenna_tau_hours else None,
        "satellites": args.satellites,
        "seed": args.seed,
    }
    spec = simgen.load_spec(args.config, **overrides)
    fleet = simgen.generate(spec)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    io.write_measurements(args.out_dir / "measurements.csv", fleet)
    io.write_carriers(args.out_dir / "carriers.csv", fleet.antenna_of,
                      fleet.satellite_of if spec.satellites > 1 else None)
    io.write_json(args.out_dir / "fleet.json", {
        "config": {
            "command": "simulate",
            "census": str(spec.census),
            "days": spec.duration.total_seconds() / 86400,
            "interval_minutes": spec.interval.total_seconds() / 60,
            "diurnal_db": spec.diurnal_db,
            "antenna_db": spec.antenna_db,
            "carrier_db": spec.carrier_db,
            "antenna_tau_hours": spec.antenna_tau.total_seconds() / 3600,
            "satellites": spec.satellites,
            "start": format_timestamp(spec.start),
            "seed": spec.seed,
        },
        "carriers": len(fleet.eirp),
        "samples_per_carrier": spec.n_samples,
    })
    log.info("wrote %d carriers x %d samples to %s", len(fleet.eirp), spec.n_samples, args.out_dir)
    return 0


def _signature_task(task):
    cid, t, v, interval, start, count, max_gap, sigma, period, encoding = task
    try:
        series = resample_samples(cid, t, v, interval, start=start, count=count, max_gap=max_gap)
        return compute_signature(gaussian_detrend(series, sigma), period, encoding)
    except CoverageError as exc:
        return exc


def cmd_signatures(args) -> int:
    interval = timedelta(minutes=_opt(args, "interval_minutes"))
    sigma = timedelta(hours=_opt(args, "window_sigma_hours"))
    max_gap = timedelta(hours=_opt(args, "max_gap_hours"))
    period = timedelta(hours=_opt(args, "period_hours"))
    encoding = _opt(args, "encoding")
    n = samples_per_period(period, interval)

    data = io.read_measurements(args.measurements, args.snr_min_db)
    step = interval.total_seconds()
    start = parse_timestamp(args.start) if args.start else None
    end = parse_timestamp(args.end) if args.end else None
    t_start = start.timestamp() if start else min(t.min() for t, _ in data.values())
    t_end = end.timestamp() if end else max(t.max() for t, _ in data.values()) + step
    available = int(math.floor((t_end - t_start) / step + 1e-9))
    m = available // n
    if m < MIN_PERIODS:
        raise InsufficientDataError(
            f"analysis period holds {available} samples = {m} full period(s) of "
            f"{_opt(args, 'period_hours'):g} h; need at least {MIN_PERIODS}")
    if available % n:
        log.warning("dropping %d trailing samples of a partial period", available % n)
    grid_start = datetime.fromtimestamp(t_start, tz=timezone.utc)

    tasks = [(cid, t, v, interval, grid_start, m * n, max_gap, sigma, period, encoding)
             for cid, (t, v) in data.items()]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_signature_task, tasks, chunksize=4))
    else:
        results = [_signature_task(t) for t in tasks]

    signatures = []
    for res in results:
        if isinstance(res, CoverageError):
            log.warning("skipping %s", res)
        else:
            if res.low_rank:
                log.warning("%s: second singular value vanishes; signature is arbitrary",
                            res.carrier_id)
            signatures.append(res)
    if not signatures:
        raise InsufficientDataError("no carrier covers the whole analysis period")
    io.write_signatures(args.out, signatures)
    log.info("wrote %d signatures (%d periods x %d samples) to %s",
             len(signatures), m, n, args.out)
    return 0


def _load_carriers(path: Optional[Path]) -> tuple:
    if path is None:
        return {}, {}
    return io.read_carriers(path)


def cmd_distances(args) -> int:
    signatures = io.read_signatures(args.signatures)
    antenna_of, satellite_of = _load_carriers(args.carriers)
    records = pair_distances(signatures, antenna_of, satellite_of,
                             include_other_satellites=args.include_other_satellites)
    io.write_distances(args.out, records)
    log.info("wrote %d pair distances to %s", len(records), args.out)
    return 0


def cmd_identify(args) -> int:
    signatures = {s.carrier_id: s for s in io.read_signatures(args.signatures)}
    if args.interferer not in signatures:
        raise UnknownCarrierError(f"interferer {args.interferer!r} not in {args.signatures}")
    antenna_of, satellite_of = _load_carriers(args.carriers)
    interferer = signatures[args.interferer]
    sat = satellite_of.get(args.interferer)
    known = [s for cid, s in signatures.items()
             if args.include_other_satellites or not sat or not satellite_of.get(cid)
             or satellite_of[cid] == sat]
    threshold = _opt(args, "threshold")
    ranking = rank_candidates(interferer, known, threshold)
    _emit_json(args.out, {
        "config": _config_echo(args, ["threshold"], signatures=args.signatures,
                               carriers=args.carriers and str(args.carriers),
                               include_other_satellites=args.include_other_satellites),
        "interferer": args.interferer,
        "threshold": threshold,
        "ranking": [
            {
                "rank": i,
                "carrier_id": c.carrier_id,
                "antenna_id": antenna_of.get(c.carrier_id),
                "distance": io.human(c.distance),
                "in_result_set": c.in_result_set,
            }
            for i, c in enumerate(ranking.candidates, 1)
        ],
        "result_set": [c.carrier_id for c in ranking.result_set],
    })
    return 0


def cmd_evaluate(args) -> int:
    records = io.read_distances(args.distances)
    if not records:
        raise InsufficientDataError(f"{args.distances}: no distance records")
    present = {r.carrier_a for r in records} | {r.carrier_b for r in records}
    if args.census:
        census = AntennaCensus.parse(args.census)
    else:
        antenna_of, _ = io.read_carriers(args.carriers)
        missing = sorted(present - set(antenna_of))
        if missing:
            raise UnknownCarrierError(f"carriers not in {args.carriers}: {', '.join(missing[:5])}")
        records = [
            r if r.same_antenna is not None or not (antenna_of[r.carrier_a] and antenna_of[r.carrier_b])
            else replace(r, same_antenna=antenna_of[r.carrier_a] == antenna_of[r.carrier_b])
            for r in records
        ]
        census = AntennaCensus.from_antenna_map({c: antenna_of[c] for c in present})
    threshold = _opt(args, "threshold")
    bin_width = _opt(args, "bin_width")
    report, dist = evaluate(records, census, threshold, bin_width)
    same, diff, total = count_pairs(census)
    if (report.pair_counts["same"], report.pair_counts["different"]) != (same, diff):
        log.warning("distance file has %d/%d same/different pairs; census implies %d/%d",
                    report.pair_counts["same"], report.pair_counts["different"], same, diff)
    if args.histogram:
        io.write_histogram(args.histogram, dist.f_same, dist.f_diff)
    _emit_json(args.out, {
        "config": _config_echo(args, ["threshold", "bin_width"], distances=args.distances,
                               carriers=args.carriers and str(args.carriers),
                               census=args.census),
        "inputs": {
            "census": str(census),
            "N_a": census.n_antennas,
            "N_s": census.n_carriers,
            "n_s": io.human(census.mean_carriers),
            "threshold": threshold,
            "pairs_same": report.pair_counts["same"],
            "pairs_different": report.pair_counts["different"],
            "census_pairs": {"same": same, "different": diff, "total": total},
        },
        "results": {k: io.human(v) for k, v in report.quantities().items()}
                   | {"p_f_exact": io.human(report.p_f_exact)},
    })
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "signatures": cmd_signatures,
    "distances": cmd_distances,
    "identify": cmd_identify,
    "evaluate": cmd_evaluate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not logging.getLogger().handlers and not log.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter("carriersig: %(levelname)s: %(message)s"))
        log.addHandler(handler)
        log.setLevel(logging.INFO)
    if getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be >= 1")
    try:
        return COMMANDS[args.command](args)
    except CarrierSigError as exc:
        print(f"carriersig: error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"carriersig: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
