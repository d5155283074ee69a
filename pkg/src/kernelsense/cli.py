"""Command-line front end.

    kernelsense sweep      --config cfg.json [--out sweep.csv] [--threads N]
    kernelsense roc        --config cfg.json --snr -16 [--out roc.csv]
    kernelsense similarity --config cfg.json [--out sim.csv]
    kernelsense calibrate  --config cfg.json --snr -16

Exit codes: 0 success, 1 configuration or argument error, 2 computation error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

from . import harness
from .config import ConfigError, experiment, load_config

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kernelsense", description="Kernel-based spectrum sensing experiments")
    parser.add_argument("-v", "--verbose", action="store_true", help="log per-SNR progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, snr: bool):
        p.add_argument("--config", required=True, help="JSON experiment config")
        p.add_argument("--out", help="output path (overrides config 'output'; default stdout)")
        p.add_argument("--threads", type=int, default=0, help="worker threads, 0 = one per CPU")
        if snr:
            p.add_argument("--snr", type=float, help="SNR in dB (default: first grid point)")

    common(sub.add_parser("sweep", help="Pd / Pf versus SNR at a calibrated threshold"), snr=False)
    common(sub.add_parser("roc", help="ROC curve at one SNR"), snr=True)
    common(sub.add_parser("similarity", help="segment-to-first-segment eigenvector similarity"), snr=False)
    common(sub.add_parser("calibrate", help="print the threshold for the target Pf"), snr=True)
    return parser


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _similarity(cfg, source) -> str:
    if cfg.detector.kind not in ("pca", "kpca"):
        raise ConfigError("detector.kind: similarity supports 'pca' or 'kpca'")
    seg = cfg.segment_len or cfg.length
    stream = source.stream() if isinstance(source, harness.FileSource) else source.stream(cfg.length)
    if stream.size < 2 * seg:
        raise ConfigError(f"signal holds {stream.size} samples, fewer than two segments of {seg}")
    if seg < cfg.d:
        raise ConfigError(f"segment_len {seg} is shorter than d={cfg.d}")
    values = harness.segment_similarity(stream, seg, cfg.detector.to_spec(), cfg.d, cfg.stride)
    return harness.similarity_csv(values)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        cfg, source = load_config(args.config)
        if args.threads < 0:
            raise ConfigError("--threads must be >= 0")
        out = args.out or cfg.output
        if args.command == "similarity":
            _emit(_similarity(cfg, source), out)
            return EXIT_OK
        exp = experiment(cfg, source, args.threads)
        if args.command == "sweep":
            _emit(harness.report_csv(harness.run_sweep(exp)), out)
        else:
            snr = args.snr if args.snr is not None else exp.snr_db[0]
            if args.command == "roc":
                _emit(harness.roc_csv(harness.roc_curve(exp, snr)), out)
            else:
                _emit(f"{harness.calibrate_threshold(exp, snr)!r}\n", args.out)
    except ConfigError as exc:
        print(f"kernelsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, RuntimeError, OSError) as exc:
        print(f"kernelsense: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
