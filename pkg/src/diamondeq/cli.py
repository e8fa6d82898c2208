"""Command-line entry point, channel-file ingestion, and serialization.

Channel file format (JSON): an object ``{"channels": [spec, spec]}`` where
each spec is

    {
      "kind": "stinespring" | "kraus" | "unitary" | "constant",
      "input_dim": n,
      "output_dim": m,
      "env_dim": z,              # optional, stinespring only
      "matrices": [matrix, ...]  # complex entries as [re, im] pairs
    }

Matrices are row-major; flattened tensor indices put the leftmost factor
most significant. Reports are JSON objects, traces line-delimited JSON with
one record per iteration (plus a leading meta record and a trailing summary
record); identical inputs and configuration produce byte-identical output.

Exit codes: 0 on a decision or bounds, 2 when the promise gap is too small
for a direct decision, 1 on any other error. Tolerance knobs are overridden
through DIAMONDEQ_* environment variables (see the tolerances module).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import oracles
from .channels import ChannelSpec, normalize
from .errors import (
    CertificateViolation,
    EigendecompositionError,
    GapTooSmallError,
    IterationCapError,
    OracleBoundError,
    ValidationError,
)
from .estimator import DiamondReport, solve_and_report
from .mmw import MMWConfig, SolverTrace
from .reduction import build_instance

COMMANDS = ("equilibrium", "qcd", "bounds", "oracle")


@dataclass(frozen=True)
class RunConfig:
    """One CLI invocation."""

    command: str
    channel_path: str
    delta: float = 0.2
    a: float | None = None
    b: float | None = None
    seed: int = 0
    rounds: int | None = None
    max_rounds: int = 1_000_000
    trials: int = 2000
    restarts: int = 50
    trace_path: str | None = None
    report_path: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValidationError(f"unknown command {self.command!r}")
        if not 0.0 < self.delta < 1.0:
            raise ValidationError(f"delta must lie in (0, 1), got {self.delta}")
        needs_promise = self.command == "qcd"
        has_promise = self.a is not None and self.b is not None
        if needs_promise and not has_promise:
            raise ValidationError("qcd requires both --a and --b")
        if not needs_promise and (self.a is not None or self.b is not None):
            raise ValidationError(f"--a/--b only apply to the qcd command, not {self.command}")

    def mmw_config(self) -> MMWConfig:
        return MMWConfig(delta=self.delta, rounds=self.rounds, max_rounds=self.max_rounds)


# ---------------------------------------------------------------------------
# Channel file parsing.

def _fail(pointer: str, message: str):
    raise ValidationError(f"{pointer}: {message}")


def _as_complex_matrix(obj, pointer: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        _fail(pointer, "expected a non-empty list of rows")
    width = None
    rows = []
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            _fail(f"{pointer}/{i}", "expected a non-empty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{pointer}/{i}", f"row length {len(row)} differs from {width}")
        entries = []
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) for x in entry)
            ):
                _fail(f"{pointer}/{i}/{j}", "complex entry must be a [re, im] pair")
            entries.append(complex(entry[0], entry[1]))
        rows.append(entries)
    return np.array(rows, dtype=np.complex128)


def matrix_to_json(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def _parse_spec(obj, pointer: str) -> ChannelSpec:
    if not isinstance(obj, dict):
        _fail(pointer, "expected a channel object")
    for key in ("kind", "input_dim", "output_dim", "matrices"):
        if key not in obj:
            _fail(f"{pointer}/{key}", "missing required field")
    kind = obj["kind"]
    if kind not in ("stinespring", "kraus", "unitary", "constant"):
        _fail(f"{pointer}/kind", f"unknown kind {kind!r}")
    for key in ("input_dim", "output_dim"):
        if not isinstance(obj[key], int) or isinstance(obj[key], bool) or obj[key] <= 0:
            _fail(f"{pointer}/{key}", "expected a positive integer")
    env_dim = obj.get("env_dim")
    if env_dim is not None and (
        not isinstance(env_dim, int) or isinstance(env_dim, bool) or env_dim <= 0
    ):
        _fail(f"{pointer}/env_dim", "expected a positive integer")
    if not isinstance(obj["matrices"], list) or not obj["matrices"]:
        _fail(f"{pointer}/matrices", "expected a non-empty list of matrices")
    mats = [
        _as_complex_matrix(m, f"{pointer}/matrices/{k}")
        for k, m in enumerate(obj["matrices"])
    ]
    try:
        return ChannelSpec(
            kind=kind,
            input_dim=obj["input_dim"],
            output_dim=obj["output_dim"],
            matrices=tuple(mats),
            env_dim=env_dim,
        )
    except ValidationError as exc:
        raise ValidationError(f"{pointer}: {exc}") from exc


def parse_channel_file(path: str) -> tuple[ChannelSpec, ChannelSpec]:
    """Load and validate a channel pair from a JSON file."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "channels" not in doc:
        _fail("/channels", "missing top-level 'channels' array")
    chans = doc["channels"]
    if not isinstance(chans, list) or len(chans) != 2:
        _fail("/channels", f"expected exactly 2 channel specs, got "
                           f"{len(chans) if isinstance(chans, list) else type(chans).__name__}")
    spec0 = _parse_spec(chans[0], "/channels/0")
    spec1 = _parse_spec(chans[1], "/channels/1")
    if spec0.input_dim != spec1.input_dim or spec0.output_dim != spec1.output_dim:
        raise ValidationError(
            "channel dimension mismatch: "
            f"({spec0.input_dim}->{spec0.output_dim}) vs "
            f"({spec1.input_dim}->{spec1.output_dim})"
        )
    return spec0, spec1


# ---------------------------------------------------------------------------
# Report and trace serialization.

def report_to_dict(report: DiamondReport) -> dict:
    return {
        "lambda": report.value,
        "delta": report.delta,
        "delta1": report.delta1,
        "interval": [report.interval[0], report.interval[1]],
        "decision": report.decision,
        "promise": None if report.promise is None else [report.promise[0], report.promise[1]],
        "thresholds": None if report.thresholds is None
        else [report.thresholds[0], report.thresholds[1]],
        "lower_cert": report.lower_cert,
        "upper_cert": report.upper_cert,
        "iterations": report.iterations,
    }


def report_from_dict(doc: dict) -> DiamondReport:
    return DiamondReport(
        value=doc["lambda"],
        delta=doc["delta"],
        delta1=doc["delta1"],
        interval=(doc["interval"][0], doc["interval"][1]),
        lower_cert=doc["lower_cert"],
        upper_cert=doc["upper_cert"],
        iterations=doc["iterations"],
        decision=doc["decision"],
        promise=None if doc["promise"] is None else tuple(doc["promise"]),
        thresholds=None if doc["thresholds"] is None else tuple(doc["thresholds"]),
    )


def trace_to_records(trace: SolverTrace) -> list:
    records = [{
        "kind": "meta",
        "dim": trace.dim,
        "epsilon": trace.epsilon,
        "rounds": trace.rounds,
        "delta": trace.delta,
        "delta1": trace.delta1,
        "exponent_norm_bound": trace.exponent_norm_bound,
    }]
    for i in range(trace.executed):
        records.append({
            "kind": "iter",
            "t": i + 1,
            "loss": float(trace.losses[i]),
            "inner": float(trace.step_inners[i]),
            "exp_min": float(trace.exp_min[i]),
            "exp_max": float(trace.exp_max[i]),
            "rho_trace_err": float(trace.rho_trace_err[i]),
            "rho_min_eig": float(trace.rho_min_eig[i]),
            "m_min_eig": float(trace.m_min_eig[i]),
            "m_max_eig": float(trace.m_max_eig[i]),
        })
    records.append({
        "kind": "summary",
        "lambda": trace.value,
        "loss_sum": None if trace.loss_sum is None else matrix_to_json(trace.loss_sum),
    })
    return records


def trace_from_records(records: list) -> SolverTrace:
    if not records or records[0].get("kind") != "meta" or records[-1].get("kind") != "summary":
        raise ValidationError("trace records must start with meta and end with summary")
    meta, summary = records[0], records[-1]
    iters = [r for r in records[1:-1] if r.get("kind") == "iter"]
    if len(iters) != len(records) - 2:
        raise ValidationError("unexpected record kind inside trace body")

    def column(key):
        return np.array([r[key] for r in iters], dtype=np.float64)

    loss_sum = summary["loss_sum"]
    return SolverTrace(
        dim=meta["dim"],
        epsilon=meta["epsilon"],
        rounds=meta["rounds"],
        delta=meta["delta"],
        delta1=meta["delta1"],
        exponent_norm_bound=meta["exponent_norm_bound"],
        losses=column("loss"),
        step_inners=column("inner"),
        exp_min=column("exp_min"),
        exp_max=column("exp_max"),
        rho_trace_err=column("rho_trace_err"),
        rho_min_eig=column("rho_min_eig"),
        m_min_eig=column("m_min_eig"),
        m_max_eig=column("m_max_eig"),
        loss_sum=None if loss_sum is None else _as_complex_matrix(loss_sum, "/loss_sum"),
        value=summary["lambda"],
    )


def write_trace(trace: SolverTrace, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in trace_to_records(trace):
            handle.write(json.dumps(record, sort_keys=True))
            handle.write("\n")


def read_trace(path: str) -> SolverTrace:
    with open(path, "r", encoding="utf-8") as handle:
        records = [json.loads(line) for line in handle if line.strip()]
    return trace_from_records(records)


# ---------------------------------------------------------------------------
# Commands.

def _emit(doc: dict, config: RunConfig, stream) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True)
    print(text, file=stream)
    if config.report_path:
        with open(config.report_path, "w", encoding="utf-8") as handle:
            handle.write(text)
            handle.write("\n")


def _oracle_report(config: RunConfig) -> dict:
    spec0, spec1 = parse_channel_file(config.channel_path)
    doc = {
        "unitary_diamond": None,
        "constant_diamond": None,
        "lower_search": None,
        "naive_lb": None,
        "naive_ub": None,
        "fmax": None,
    }
    if spec0.kind == "unitary" and spec1.kind == "unitary":
        doc["unitary_diamond"] = oracles.unitary_diamond(spec0.matrices[0], spec1.matrices[0])
    if spec0.kind == "constant" and spec1.kind == "constant":
        doc["constant_diamond"] = oracles.constant_diamond(spec0.matrices[0], spec1.matrices[0])
    doc["lower_search"] = oracles.diamond_lower_search(
        spec0, spec1, trials=config.trials, seed=config.seed
    )
    if spec0.input_dim <= 3:
        inst = build_instance(normalize(spec0), normalize(spec1))
        lb, ub = oracles.naive_equilibrium(inst, iters=10, seed=config.seed)
        doc["naive_lb"] = lb
        doc["naive_ub"] = ub
        doc["fmax"] = oracles.fmax_estimate(inst, restarts=config.restarts, seed=config.seed)
    return doc


def run(config: RunConfig, stream=None) -> int:
    """Execute one command; returns the process exit code."""
    stream = sys.stdout if stream is None else stream
    try:
        if config.command == "oracle":
            _emit(_oracle_report(config), config, stream)
            return 0
        spec0, spec1 = parse_channel_file(config.channel_path)
        inst = build_instance(normalize(spec0), normalize(spec1))
        cfg = config.mmw_config()
        promise = (config.a, config.b) if config.command == "qcd" else None
        report, result = solve_and_report(inst, cfg, promise=promise)
        _emit(report_to_dict(report), config, stream)
        if config.trace_path:
            write_trace(result.trace, config.trace_path)
        return 0
    except GapTooSmallError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError, EigendecompositionError,
            OracleBoundError, IterationCapError, CertificateViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diamondeq",
        description="Distinguishability decisions and diamond-norm intervals "
                    "for quantum channel pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, blurb in (
        ("equilibrium", "solve for the equilibrium value of the channel pair"),
        ("qcd", "decide a distinguishability promise (requires --a/--b)"),
        ("bounds", "report a rigorous interval for the diamond distance"),
        ("oracle", "run independent reference computations for cross-checks"),
    ):
        p = sub.add_parser(name, help=blurb)
        p.add_argument("channels", help="path to the channel-pair JSON file")
        p.add_argument("--report-out", default=None, help="also write the report here")
        p.add_argument("--seed", type=int, default=0)
        if name == "oracle":
            p.add_argument("--trials", type=int, default=2000,
                           help="samples for the lower-bound search")
            p.add_argument("--restarts", type=int, default=50,
                           help="restarts for the max-fidelity ascent")
        else:
            p.add_argument("--delta", type=float, default=0.2,
                           help="target precision of the solved value")
            p.add_argument("--rounds", type=int, default=None,
                           help="override the iteration-count formula")
            p.add_argument("--max-rounds", type=int, default=1_000_000,
                           help="safety cap on iterations")
            p.add_argument("--trace-out", default=None,
                           help="write the per-iteration trace here (JSONL)")
        if name == "qcd":
            p.add_argument("--a", type=float, default=None,
                           help="promise: diamond distance is either >= a ...")
            p.add_argument("--b", type=float, default=None,
                           help="... or <= b")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig(
            command=args.command,
            channel_path=args.channels,
            delta=getattr(args, "delta", 0.2),
            a=getattr(args, "a", None),
            b=getattr(args, "b", None),
            seed=args.seed,
            rounds=getattr(args, "rounds", None),
            max_rounds=getattr(args, "max_rounds", 1_000_000),
            trials=getattr(args, "trials", 2000),
            restarts=getattr(args, "restarts", 50),
            trace_path=getattr(args, "trace_out", None),
            report_path=args.report_out,
        )
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
