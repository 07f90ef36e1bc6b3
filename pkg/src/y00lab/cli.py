"""Command-line workbench: ``y00lab <subcommand> [flags]``.

Every flag may also come from a JSON config file (``--config``) whose keys
are the flag names without leading dashes (``"alpha2": 400``, ``"key-width": 16``
or ``"key_width": 16``).  Flags given on the command line win over the file.

Exit status: 0 success, 2 usage or configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from . import experiments as ex
from .cryptanalysis import CipherScenario
from .errors import ConfigError, DomainError
from .protocol import SessionConfig
from .scoring import CribScorer, LanguageScorer
from .transcript import write_transcript
from .wheel import WheelConfig

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3

COMMANDS = ("simulate", "attack", "sweep-alpha", "recover-key", "ber", "wheel-audit")
MODES = {"otp": "one_time_pad", "one_time_pad": "one_time_pad", "block": "block"}


@dataclass
class ExperimentConfig:
    experiment: str
    M: int = 1024
    alpha2: float = 400.0
    n: int = 100_000
    seed: int = 0
    key: int = 0xACE1
    key_width: int = 16
    mode: str = "otp"
    out: Optional[str] = None
    workers: int = 1
    noiseless: bool = False
    channel_noise: float = 0.0
    grid: Optional[list] = None
    reps: int = 1
    resend: str = "state"
    plaintext_file: Optional[str] = None
    blocks: int = 64
    block_size: int = 16
    rounds: int = 4
    crib: Optional[str] = None
    scorer: str = "letters"
    no_timing: bool = False

    def validate(self) -> None:
        if self.experiment not in COMMANDS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.reps < 1:
            raise ConfigError(f"repetitions must be >= 1, got {self.reps}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be otp or block, got {self.mode!r}")
        if self.scorer not in ("letters", "extended"):
            raise ConfigError(f"scorer must be letters or extended, got {self.scorer!r}")
        if self.grid is not None and any(not (a > 0) for a in self.grid):
            raise ConfigError("sweep grid points must be positive")
        if self.blocks < 1:
            raise ConfigError(f"blocks must be >= 1, got {self.blocks}")

    def wheel(self) -> WheelConfig:
        return WheelConfig.from_alpha2(self.M, self.alpha2)

    def session(self) -> SessionConfig:
        return ex.session_config(
            M=self.M,
            alpha2=self.alpha2,
            n=self.n,
            seed=self.seed,
            key=self.key,
            key_width=self.key_width,
            noiseless=self.noiseless,
            channel_noise=self.channel_noise,
        )

    def scenario(self) -> CipherScenario:
        mode = MODES[self.mode]
        if self.plaintext_file is not None:
            text = Path(self.plaintext_file).read_bytes()
        elif mode == "one_time_pad":
            text = ex.SAMPLE_TEXT[:256]
        else:
            text = (ex.SAMPLE_TEXT * 8)[: self.blocks * self.block_size // 8]
        return CipherScenario(mode, text, block_size=self.block_size, cipher_rounds=self.rounds)

    def scoring(self):
        if self.crib is not None:
            return CribScorer(self.crib.encode())
        return LanguageScorer(self.scorer)


def parse_key(text: str) -> int:
    try:
        return int(str(text), 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer key: {text!r}") from None


def parse_grid(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be comma-separated numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common")
    g.add_argument("--config", help="JSON file with default values for any flag")
    g.add_argument("--M", type=int, dest="M", help="bases on the wheel (2M states); default 1024")
    g.add_argument("--alpha2", type=float, help="mean photon number |alpha|^2; default 400")
    g.add_argument("--n", type=int, help="symbols per session; default 100000")
    g.add_argument("--seed", type=int, help="master seed for the simulated physical randomness")
    g.add_argument("--key", type=parse_key, help="planted shared secret, e.g. 0xACE1")
    g.add_argument("--key-width", type=int, dest="key_width", help="shift register width in bits; default 16")
    g.add_argument("--mode", choices=sorted(MODES), help="message cipher for recover-key; default otp")
    g.add_argument("--out", help="output file (transcript, CSV or JSON report)")
    g.add_argument("--workers", type=int, help="worker processes; default 1")
    g.add_argument("--noiseless", action="store_const", const=True, help="switch off quantum measurement noise")
    g.add_argument("--channel-noise", type=float, dest="channel_noise", help="excess channel noise scale; default 0")

    parser = argparse.ArgumentParser(prog="y00lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="experiment", required=True)
    sub.add_parser("simulate", parents=[common], help="honest session; writes a transcript")
    p = sub.add_parser("attack", parents=[common], help="intercept-resend session and relation report")
    p.add_argument("--resend", choices=["state", "estimate"], help="what Eve forwards to Bob")
    p = sub.add_parser("sweep-alpha", parents=[common], help="CSV of error rates over |alpha|^2")
    p.add_argument("--grid", type=parse_grid, help="comma-separated |alpha|^2 values")
    p.add_argument("--reps", type=int, help="repetitions per grid point; default 1")
    p = sub.add_parser("recover-key", parents=[common], help="session, attack and exhaustive key search")
    p.add_argument("--plaintext-file", dest="plaintext_file", help="message to encrypt; default built-in English text")
    p.add_argument("--blocks", type=int, help="block mode: number of blocks of the default text; default 64")
    p.add_argument("--block-size", type=int, dest="block_size", help="block mode: bits per block; default 16")
    p.add_argument("--rounds", type=int, help="block mode: Feistel rounds; default 4")
    p.add_argument("--crib", help="score candidates by this known plaintext prefix instead of language statistics")
    p.add_argument("--scorer", choices=["letters", "extended"], help="language scoring profile; default letters")
    p.add_argument("--no-timing", dest="no_timing", action="store_const", const=True,
                   help="report elapsed_ms as null so reports are byte-reproducible")
    sub.add_parser("ber", parents=[common], help="Bob's error counts with and without Eve")
    sub.add_parser("wheel-audit", parents=[common], help="seams, classes and cut geometry of the wheel")
    return parser


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)} - {"experiment"}
_INT_FIELDS = {"M", "n", "seed", "key", "key_width", "workers", "reps", "blocks", "block_size", "rounds"}
_FLOAT_FIELDS = {"alpha2", "channel_noise"}
_BOOL_FIELDS = {"noiseless", "no_timing"}


def _coerce(name: str, value):
    if name == "key" and isinstance(value, str):
        return parse_key(value)
    if name == "grid":
        values = parse_grid(value) if isinstance(value, str) else value
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ConfigError(f"grid must be a list of numbers, got {value!r}")
        return [float(v) for v in values]
    if name in _INT_FIELDS and not (isinstance(value, int) and not isinstance(value, bool)):
        raise ConfigError(f"config key {name!r} must be an integer, got {value!r}")
    if name in _FLOAT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"config key {name!r} must be a number, got {value!r}")
        return float(value)
    if name in _BOOL_FIELDS and not isinstance(value, bool):
        raise ConfigError(f"config key {name!r} must be true or false, got {value!r}")
    if name not in _INT_FIELDS | _FLOAT_FIELDS | _BOOL_FIELDS and value is not None and not isinstance(value, str):
        raise ConfigError(f"config key {name!r} must be a string, got {value!r}")
    return value


def load_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        for key, value in raw.items():
            name = key.replace("-", "_")
            if name == "repetitions":
                name = "reps"
            if name not in _FIELD_NAMES:
                raise ConfigError(f"unknown config key {key!r}")
            values[name] = _coerce(name, value)
    for name in _FIELD_NAMES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = ExperimentConfig(experiment=args.experiment.replace("_", "-"), **values)
    cfg.validate()
    return cfg


def _check_writable(path: Optional[str]) -> None:
    if path is None:
        return
    parent = Path(path).resolve().parent
    if not parent.is_dir() or not os.access(parent, os.W_OK):
        raise OSError(f"cannot write output file {path}")


def _emit_json(report: dict, out: Optional[str]) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out is not None:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def rows_to_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(ex.SWEEP_FIELDS), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _prepare(cfg: ExperimentConfig):
    """Build and validate every sub-configuration before any computation starts."""
    if cfg.experiment == "wheel-audit":
        return cfg.wheel(), None
    session = cfg.session()
    scenario = cfg.scenario() if cfg.experiment == "recover-key" else None
    if cfg.experiment == "recover-key":
        cfg.scoring()
    if cfg.experiment == "sweep-alpha":
        ex.sweep_grid(cfg.grid)
    return session, scenario


def run(cfg: ExperimentConfig, prepared) -> None:
    first, scenario = prepared
    if cfg.experiment == "wheel-audit":
        _emit_json(ex.wheel_audit(first), cfg.out)
    elif cfg.experiment == "simulate":
        records, summary = ex.simulate(first, workers=cfg.workers)
        if cfg.out is not None:
            write_transcript(cfg.out, records)
        sys.stdout.write(json.dumps(summary, indent=2) + "\n")
    elif cfg.experiment == "attack":
        records, report = ex.attack(first, workers=cfg.workers, resend=cfg.resend)
        if cfg.out is not None:
            write_transcript(cfg.out, records)
        sys.stdout.write(json.dumps(report, indent=2) + "\n")
    elif cfg.experiment == "ber":
        _emit_json(ex.ber(first, workers=cfg.workers), cfg.out)
    elif cfg.experiment == "sweep-alpha":
        text = rows_to_csv(ex.sweep_alpha(first, cfg.grid, cfg.reps, cfg.workers))
        if cfg.out is not None:
            Path(cfg.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    elif cfg.experiment == "recover-key":
        outcome = ex.recover_key(first, scenario, cfg.scoring(), workers=cfg.workers, timed=not cfg.no_timing)
        report = outcome.report(first, scenario)
        report["n"] = scenario.n_bits
        _emit_json(report, cfg.out)


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args)
        prepared = _prepare(cfg)
    except (ConfigError, DomainError, argparse.ArgumentTypeError) as exc:
        print(f"y00lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"y00lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        _check_writable(cfg.out)
        run(cfg, prepared)
    except OSError as exc:
        print(f"y00lab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, DomainError) as exc:
        print(f"y00lab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


def entry() -> None:
    sys.exit(main())
