"""
Command-line front end.

    immi sweep    --t 2 --r 2 --constellation qpsk --snr-db -10:30:1 --channels 1000 --out mi.csv
    immi compare  --t 2 --r 2 --constellation qpsk --snr-db 0:15:5 --channels 100 --out cmp.csv
    immi gen-channels --r 2 --t 2 --channels 100 --seed 1 --out ch.json
    immi adapt    --channel-file ch.json --mcs-table mcs.json --constellation qpsk --snr-db 10 --out la.csv

Exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import numpy as np

from .channels import ChannelEnsemble, ChannelFileError, load_channels, rayleigh_ensemble, save_channels
from .closed_form import mi_curves
from .linkadapt import McsTableError, effective_mi, load_mcs_table, select_mcs
from .model import Constellation, SnrPoint, augment, parse_constellation
from .oracle import METHODS, mi_monte_carlo

log = logging.getLogger("immi")

SWEEP_COLUMNS = ["snr_db", "method", "mi_bits_mean", "mi_bits_stderr_over_channels", "oracle_mc_stderr"]
COMPARE_COLUMNS = SWEEP_COLUMNS + ["abs_err_mean", "abs_err_max"]
DEFAULT_ORACLE_SAMPLES = 10_000


class UsageError(Exception):
    pass


def parse_snr_grid(text: str) -> list[str]:
    """
    ``"A:B:STEP"`` (inclusive of B when hit exactly) or a single value ``"A"``.
    Values are generated in decimal arithmetic and returned as strings so
    they can be echoed without float drift.
    """
    try:
        parts = [Decimal(p) for p in text.split(":")]
    except InvalidOperation:
        raise UsageError(f"invalid SNR grid {text!r}") from None
    if any(not p.is_finite() for p in parts):
        raise UsageError(f"invalid SNR grid {text!r}")
    if len(parts) == 1:
        return [str(parts[0])]
    if len(parts) != 3:
        raise UsageError(f"SNR grid must be A:B:STEP, got {text!r}")
    start, stop, step = parts
    if step <= 0 or stop < start:
        raise UsageError(f"SNR grid needs STEP > 0 and B >= A, got {text!r}")
    out = []
    v = start
    while v <= stop:
        out.append(str(v))
        v += step
    return out


def derive_seed(master: int, channel_idx: int, snr_idx: int) -> int:
    """Per work-item oracle seed from (master seed, channel index, SNR index)."""
    ss = np.random.SeedSequence(master, spawn_key=(channel_idx, snr_idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class SweepConfig:
    r: int = 2
    t: int = 2
    constellation: str = "qpsk"
    snr_db: list = field(default_factory=lambda: ["0"])
    n_channels: int = 100
    methods: tuple = ("first_order", "second_order")
    oracle_samples: int = DEFAULT_ORACLE_SAMPLES
    seed: int = 0
    channel_file: str | None = None
    raw: bool = False
    workers: int = 1

    def __post_init__(self):
        if not self.methods:
            raise UsageError("methods list is empty")
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise UsageError(f"unknown methods {bad}; choose from {list(METHODS)}")
        if self.n_channels < 1:
            raise UsageError("--channels must be >= 1")
        if not self.snr_db:
            raise UsageError("empty SNR grid")
        if "monte_carlo" in self.methods and self.oracle_samples < 2:
            raise UsageError("--oracle-samples must be >= 2")


def _ensemble(cfg: SweepConfig) -> ChannelEnsemble:
    if cfg.channel_file:
        return load_channels(cfg.channel_file)
    return rayleigh_ensemble(cfg.r, cfg.t, cfg.n_channels, cfg.seed)


def _constellation(text: str) -> Constellation:
    try:
        return parse_constellation(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def evaluate_grid(cfg: SweepConfig, with_oracle: bool = False):
    """
    Per-channel MI for every method and SNR point.

    Returns ``(values, mc_stderr, ceiling)`` where ``values[method]`` has
    shape ``(n_channels, n_snr)``.
    """
    const = _constellation(cfg.constellation)
    ens = _ensemble(cfg)
    gammas = np.array([SnrPoint.from_db(float(s)).gamma for s in cfg.snr_db])
    methods = set(cfg.methods) | ({"monte_carlo"} if with_oracle else set())
    ceiling = math.log2(ens.t * const.order)

    def one(ch_idx):
        aug = augment(ens[ch_idx], const)
        out = {}
        if methods & {"first_order", "second_order"}:
            i1, i2 = mi_curves(aug, gammas)
            out["first_order"] = np.clip(i1, 0.0, ceiling)
            out["second_order"] = i2 if cfg.raw else np.clip(i2, 0.0, ceiling)
        if "monte_carlo" in methods:
            est = [
                mi_monte_carlo(aug, g, cfg.oracle_samples, derive_seed(cfg.seed, ch_idx, j))
                for j, g in enumerate(gammas)
            ]
            out["monte_carlo"] = np.array([e.mean_bits for e in est])
            out["mc_stderr"] = np.array([e.std_error_bits for e in est])
        return out

    idx = range(len(ens))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            per_channel = list(pool.map(one, idx))
    else:
        per_channel = [one(i) for i in idx]

    values = {m: np.stack([pc[m] for pc in per_channel]) for m in methods}
    mc_stderr = np.stack([pc["mc_stderr"] for pc in per_channel]) if "monte_carlo" in methods else None
    return values, mc_stderr, ceiling


def _fmt(x) -> str:
    return repr(float(x))


def _stderr_over_channels(v: np.ndarray) -> np.ndarray:
    if v.shape[0] < 2:
        return np.zeros(v.shape[1])
    return np.std(v, axis=0, ddof=1) / math.sqrt(v.shape[0])


def _summary_rows(cfg, values, mc_stderr, methods, compare):
    rows = []
    for j, snr in enumerate(cfg.snr_db):
        for m in sorted(methods):
            v = values[m]
            row = {
                "snr_db": snr,
                "method": m,
                "mi_bits_mean": _fmt(np.mean(v[:, j])),
                "mi_bits_stderr_over_channels": _fmt(_stderr_over_channels(v)[j]),
                "oracle_mc_stderr": _fmt(np.mean(mc_stderr[:, j])) if m == "monte_carlo" else "",
            }
            if compare:
                if m == "monte_carlo":
                    row["abs_err_mean"] = row["abs_err_max"] = ""
                else:
                    err = np.abs(v[:, j] - values["monte_carlo"][:, j])
                    row["abs_err_mean"] = _fmt(np.mean(err))
                    row["abs_err_max"] = _fmt(np.max(err))
            rows.append(row)
    rows.sort(key=lambda r: (float(r["snr_db"]), r["method"]))
    return rows


def run_sweep(cfg: SweepConfig) -> list[dict]:
    values, mc_stderr, _ = evaluate_grid(cfg)
    return _summary_rows(cfg, values, mc_stderr, cfg.methods, compare=False)


def run_compare(cfg: SweepConfig) -> list[dict]:
    values, mc_stderr, _ = evaluate_grid(cfg, with_oracle=True)
    methods = set(cfg.methods) | {"monte_carlo"}
    return _summary_rows(cfg, values, mc_stderr, methods, compare=True)


def rows_to_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def plot_script(csv_name: str, methods, ylabel: str = "MI [bits]") -> str:
    lines = [
        "# gnuplot script; run: gnuplot -p " + Path(csv_name).with_suffix(".gp").name,
        "set datafile separator ','",
        "set key left top",
        "set grid",
        "set xlabel 'SNR [dB]'",
        f"set ylabel '{ylabel}'",
    ]
    plots = [
        f"'{csv_name}' using 1:(strcol(2) eq '{m}' ? $3 : 1/0) skip 1 with linespoints title '{m}'"
        for m in sorted(methods)
    ]
    lines.append("plot " + ", \\\n     ".join(plots))
    return "\n".join(lines) + "\n"


def _write_outputs(out: str | None, text: str, methods) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text, encoding="utf-8")
    path.with_suffix(".gp").write_text(plot_script(path.name, methods), encoding="utf-8")


def _config_from_args(args) -> SweepConfig:
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    return SweepConfig(
        r=args.r,
        t=args.t,
        constellation=args.constellation,
        snr_db=parse_snr_grid(args.snr_db),
        n_channels=args.channels,
        methods=methods,
        oracle_samples=args.oracle_samples,
        seed=args.seed,
        channel_file=args.channel_file,
        raw=args.raw,
        workers=args.workers,
    )


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    rows = run_sweep(cfg)
    _write_outputs(args.out, rows_to_csv(rows, SWEEP_COLUMNS), cfg.methods)
    return 0


def cmd_compare(args) -> int:
    cfg = _config_from_args(args)
    rows = run_compare(cfg)
    _write_outputs(args.out, rows_to_csv(rows, COMPARE_COLUMNS), set(cfg.methods) | {"monte_carlo"})
    return 0


def cmd_gen_channels(args) -> int:
    if args.channels < 1:
        raise UsageError("--channels must be >= 1")
    ens = rayleigh_ensemble(args.r, args.t, args.channels, args.seed)
    save_channels(ens, args.out)
    log.info("wrote %d %dx%d channels to %s", len(ens), args.r, args.t, args.out)
    return 0


def run_adapt(ensemble, table, constellation, snr_db: list[str], block_size: int, method: str) -> list[dict]:
    rows = []
    n = len(ensemble)
    for snr in snr_db:
        point = SnrPoint.from_db(float(snr))
        for b, start in enumerate(range(0, n, block_size)):
            block = [(h, point) for h in ensemble.realizations[start:start + block_size]]
            eff = effective_mi(block, constellation, method)
            entry = select_mcs(eff, table)
            block_id = str(b) if len(snr_db) == 1 else f"{snr}dB:{b}"
            rows.append({
                "block_id": block_id,
                "eff_mi_bits": _fmt(eff),
                "selected_mcs_id": entry.id if entry is not None else "none",
            })
    return rows


def cmd_adapt(args) -> int:
    if args.block_size < 1:
        raise UsageError("--block-size must be >= 1")
    if args.method not in ("first_order", "second_order"):
        raise UsageError("--method must be first_order or second_order")
    const = _constellation(args.constellation)
    grid = parse_snr_grid(args.snr_db)
    ens = load_channels(args.channel_file)
    table = load_mcs_table(args.mcs_table, ens.t)
    rows = run_adapt(ens, table, const, grid, args.block_size, args.method)
    text = rows_to_csv(rows, ["block_id", "eff_mi_bits", "selected_mcs_id"])
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="immi", description="Mutual information of index modulations")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def grid_opts(sp, default_methods):
        sp.add_argument("--t", type=int, default=2, help="channel inputs (hop indices)")
        sp.add_argument("--r", type=int, default=2, help="channel outputs")
        sp.add_argument("--constellation", default="qpsk")
        sp.add_argument("--snr-db", default="-10:30:1", metavar="A:B:STEP")
        sp.add_argument("--channels", type=int, default=100)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--methods", default=default_methods)
        sp.add_argument("--oracle-samples", type=int, default=DEFAULT_ORACLE_SAMPLES)
        sp.add_argument("--channel-file")
        sp.add_argument("--out")
        sp.add_argument("--raw", action="store_true", help="emit unclamped second-order values")
        sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("sweep", help="MI versus SNR averaged over a channel ensemble")
    grid_opts(sp, "first_order,second_order,monte_carlo")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("compare", help="closed-form error against the Monte Carlo oracle")
    grid_opts(sp, "first_order,second_order")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("gen-channels", help="write a Rayleigh channel ensemble")
    sp.add_argument("--r", type=int, default=2)
    sp.add_argument("--t", type=int, default=2)
    sp.add_argument("--channels", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_channels)

    sp = sub.add_parser("adapt", help="MI-based MCS selection per block")
    sp.add_argument("--channel-file", required=True)
    sp.add_argument("--mcs-table", required=True)
    sp.add_argument("--constellation", default="qpsk")
    sp.add_argument("--snr-db", default="10")
    sp.add_argument("--block-size", type=int, default=1)
    sp.add_argument("--method", default="first_order")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_adapt)
    return p


def _join_negative_values(argv: list[str]) -> list[str]:
    # argparse reads "--snr-db -10:30:1" as two flags; glue it to "--snr-db=-10:30:1"
    out = []
    i = 0
    while i < len(argv):
        if argv[i] == "--snr-db" and i + 1 < len(argv) and argv[i + 1][:1] == "-":
            out.append(f"--snr-db={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_join_negative_values(argv))
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"immi: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ChannelFileError, McsTableError, ValueError) as exc:
        print(f"immi: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
