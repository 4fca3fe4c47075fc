"""Command-line front end.

Exit status: 0 on success, 2 on invalid arguments, 3 when a walk reached
its cap (the partial result is still written).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import __version__
from .channel import (
    COMPUTATIONAL_BASIS, ChannelSpec, NonUnitaryBranchError, backaction, stinespring_kraus,
)
from .protocol import circuit_from_json, execute, program_from_json
from .qcore import make_gate
from .serialization import SCHEMA_VERSION, dumps, operator_from_json, operator_to_json
from .synth1q import SynthTarget, default_generators, hitting_stats, run_until
from .synth2q import increments, run_until_beta, run_until_beta_exact

EXIT_OK, EXIT_USAGE, EXIT_CAP = 0, 2, 3
_MAX_SEED = 2**64


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    alpha: float = math.pi / 8
    epsilon: float = 0.01
    cap: int = 10**7
    trials: int = 1
    seed: int | None = None
    format: str = "json"
    output: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self, needs_seed: bool = True):
        for name in ("alpha", "epsilon"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise UsageError(f"--{name} must be positive and finite, got {v}")
        if self.cap < 1:
            raise UsageError("--cap must be a positive integer")
        if self.trials < 1:
            raise UsageError("--trials must be a positive integer")
        if needs_seed:
            if self.seed is None:
                raise UsageError("--seed is required (runs are never auto-seeded)")
            if not 0 <= self.seed < _MAX_SEED:
                raise UsageError("--seed must be a 64-bit unsigned integer")


_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*)\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d*)?))?\s*$")


def parse_angle(text: str) -> float:
    """Float, or multiples of pi such as ``pi/8``, ``3pi/8``, ``-pi/4``."""
    try:
        value = float(text)
    except ValueError:
        m = _ANGLE.match(text)
        if not m:
            raise argparse.ArgumentTypeError(f"not an angle: {text!r}")
        sign, coef, den = m.groups()
        value = (float(coef) if coef else 1.0) * math.pi / (float(den) if den else 1.0)
        value = -value if sign == "-" else value
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"angle must be finite: {text!r}")
    return value


def parse_count(text: str) -> int:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(v) or v != int(v):
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    return int(v)


def parse_target(text: str):
    path = Path(text)
    if path.is_file():
        return operator_from_json(json.loads(path.read_text()))
    m = re.match(r"^(\w+)(?:[(:](.+?)\)?)?$", text.strip())
    if not m:
        raise UsageError(f"cannot parse target {text!r}")
    name, param = m.groups()
    try:
        if param is None:
            return make_gate(name)
        return make_gate(name, parse_angle(param))
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise UsageError(str(exc))


def _threads() -> int:
    raw = os.environ.get("RUS_ADQC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"RUS_ADQC_THREADS must be an integer, got {raw!r}")


def _header(cfg: RunConfig) -> dict:
    config = asdict(cfg)
    extra = config.pop("extra")
    config.update(extra)
    return {"schema": SCHEMA_VERSION, "version": __version__, "config": config, "seed": cfg.seed}


def _csv(cfg: RunConfig, rows, summary=None) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(_header(cfg), sort_keys=True) + "\n")
    if summary is not None:
        buf.write("# summary " + json.dumps(summary, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["trial", "stop_step", "final_distance", "capped"])
    for trial, step, dist, capped in rows:
        w.writerow([trial, "" if capped else step, format(float(dist), ".17g"),
                    "true" if capped else "false"])
    return buf.getvalue()


def _summary(stats) -> dict:
    def f(x):
        return None if math.isnan(x) else float(format(x, ".17g"))

    return {"trials": stats.trials, "mean": f(stats.mean), "median": f(stats.median),
            "p95": f(stats.p95), "failure_count": stats.failure_count}


# subcommands ------------------------------------------------------------

def cmd_kraus(args, cfg: RunConfig):
    make = ChannelSpec.ising if args.flavor == "ising" else ChannelSpec.controlled
    kw = {}
    if args.basis == "computational":
        kw = {"basis": COMPUTATIONAL_BASIS[0], "labels": COMPUTATIONAL_BASIS[1]}
    spec = make(cfg.alpha, args.qubits, **kw)
    try:
        branches = stinespring_kraus(spec)
    except NonUnitaryBranchError as exc:
        raise UsageError(str(exc))
    out = []
    for b in branches:
        entry = {"outcome": b.outcome, "probability": b.probability,
                 "kraus": operator_to_json(b.kraus), "unitary": operator_to_json(b.unitary)}
        if b.classification is not None:
            entry["beta"] = b.classification.beta
            entry["z1"] = b.classification.z1
            entry["z2"] = b.classification.z2
        out.append(entry)
    report = backaction(spec)
    ba = {"symmetric": report.symmetric}
    if report.planes_perpendicular is not None:
        ba["planes_perpendicular"] = report.planes_perpendicular
    return {"header": _header(cfg), "branches": out, "backaction": ba}, EXIT_OK


def cmd_synth1q(args, cfg: RunConfig):
    if cfg.epsilon > 1:
        raise UsageError("--epsilon must lie in (0, 1]")
    target = SynthTarget(parse_target(args.target), cfg.epsilon, cfg.cap, args.pauli_tolerant)
    gens, probs = default_generators(cfg.alpha, args.flavor)
    if cfg.trials == 1:
        t = run_until(target, cfg.seed, gens, probs)
        return {"header": _header(cfg), "trajectory": t.to_dict()}, (EXIT_CAP if t.capped else EXIT_OK)
    stats = hitting_stats(target, cfg.trials, cfg.seed, gens, probs, workers=_threads())
    return _trial_output(cfg, stats)


def _trial_output(cfg, stats):
    rows = [(i, int(s), d, s < 0) for i, (s, d) in
            enumerate(zip(stats.stop_steps, stats.final_distances))]
    code = EXIT_CAP if stats.failure_count else EXIT_OK
    if cfg.format == "csv":
        return _csv(cfg, rows, _summary(stats)), code
    trials = [{"trial": i, "stop_step": None if c else s, "final_distance": float(d), "capped": c}
              for i, s, d, c in rows]
    return {"header": _header(cfg), "summary": _summary(stats), "trials": trials}, code


def cmd_hitting_stats(args, cfg: RunConfig):
    return cmd_synth1q(args, cfg) if cfg.trials > 1 else _single_as_stats(args, cfg)


def _single_as_stats(args, cfg):
    target = SynthTarget(parse_target(args.target), cfg.epsilon, cfg.cap, args.pauli_tolerant)
    gens, probs = default_generators(cfg.alpha, args.flavor)
    return _trial_output(cfg, hitting_stats(target, 1, cfg.seed, gens, probs))


def cmd_synth2q(args, cfg: RunConfig):
    try:
        params = increments(cfg.alpha, args.flavor)
    except ValueError as exc:
        raise UsageError(str(exc))
    exact = None
    if args.exact:
        try:
            fr = Fraction(args.exact)
        except ValueError:
            raise UsageError(f"--exact expects p/q, got {args.exact!r}")
        exact = (fr.numerator, fr.denominator)

    def one(seed):
        try:
            if exact is None:
                return run_until_beta(args.target_beta, cfg.epsilon, params, cfg.cap, seed)
            return run_until_beta_exact(args.target_beta, cfg.epsilon, params, exact, cfg.cap, seed)
        except ValueError as exc:
            raise UsageError(str(exc))

    if cfg.trials == 1:
        t = one(cfg.seed)
        body = {"header": _header(cfg), "params": asdict(params), "trajectory": t.to_dict()}
        return body, (EXIT_CAP if t.capped else EXIT_OK)
    from .synth1q import HittingStats

    trajs = [one(cfg.seed ^ i) for i in range(cfg.trials)]
    stats = HittingStats.from_steps([-1 if t.capped else t.stop_step for t in trajs],
                                    [t.final_distance for t in trajs])
    return _trial_output(cfg, stats)


def cmd_simulate(args, cfg: RunConfig):
    try:
        program = program_from_json(json.loads(Path(args.program).read_text()), cfg.seed)
        ideal = None
        if args.ideal:
            ideal = circuit_from_json(json.loads(Path(args.ideal).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot load program: {exc}")
    log = execute(program, ideal=ideal, up_to_local_z=args.up_to_local_z)
    return {"header": _header(cfg), "run": log.to_dict()}, (EXIT_CAP if log.aborted else EXIT_OK)


# parser -----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rus-adqc", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def common(sp, seed=True, epsilon=True):
        sp.add_argument("--alpha", type=parse_angle, default=math.pi / 8)
        if epsilon:
            sp.add_argument("--epsilon", type=float, default=0.01)
        sp.add_argument("--cap", type=parse_count, default=10**7)
        sp.add_argument("--trials", type=parse_count, default=1)
        if seed:
            sp.add_argument("--seed", type=parse_count, default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")
        sp.add_argument("--output", "-o", default=None)
        sp.add_argument("--flavor", choices=("controlled", "ising"), default="controlled")

    k = sub.add_parser("kraus", help="dump the measurement branches of the fixed gate")
    k.add_argument("--alpha", type=parse_angle, default=math.pi / 8)
    k.add_argument("--qubits", type=int, choices=(1, 2), default=1)
    k.add_argument("--flavor", choices=("controlled", "ising"), default="controlled")
    k.add_argument("--basis", choices=("pm-i", "computational"), default="pm-i")
    k.add_argument("--output", "-o", default=None)

    s1 = sub.add_parser("synth1q", help="single-qubit repeat-until-success walk")
    s1.add_argument("--target", required=True)
    s1.add_argument("--pauli-tolerant", action="store_true")
    common(s1)

    hs = sub.add_parser("hitting-stats", help="hitting-time statistics over many trials")
    hs.add_argument("--target", required=True)
    hs.add_argument("--pauli-tolerant", action="store_true")
    common(hs)
    hs.set_defaults(format="csv")

    s2 = sub.add_parser("synth2q", help="random walk on the two-qubit Ising angle")
    s2.add_argument("--target-beta", type=parse_angle, required=True)
    s2.add_argument("--exact", default=None, help="assert phi = (p/q) pi and walk on the lattice")
    common(s2)

    sim = sub.add_parser("simulate", help="full statevector run of a program")
    sim.add_argument("--program", required=True)
    sim.add_argument("--ideal", default=None)
    sim.add_argument("--up-to-local-z", action="store_true")
    sim.add_argument("--seed", type=parse_count, default=None)
    sim.add_argument("--output", "-o", default=None)

    sub.add_parser("version", help="print the package version")
    return p


def dispatch(argv) -> tuple[int, str]:
    """Run one command; returns ``(exit status, serialized output)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.subcommand == "version":
            return EXIT_OK, dumps({"schema": SCHEMA_VERSION, "version": __version__}) + "\n"
        cfg = RunConfig(args.subcommand,
                        alpha=getattr(args, "alpha", math.pi / 8),
                        epsilon=getattr(args, "epsilon", 0.01),
                        cap=getattr(args, "cap", 10**7),
                        trials=getattr(args, "trials", 1),
                        seed=getattr(args, "seed", None),
                        format=getattr(args, "format", "json"),
                        output=getattr(args, "output", None))
        handler = {"kraus": cmd_kraus, "synth1q": cmd_synth1q, "synth2q": cmd_synth2q,
                   "hitting-stats": cmd_hitting_stats, "simulate": cmd_simulate}[args.subcommand]
        for key in ("target", "pauli_tolerant", "flavor", "qubits", "basis", "target_beta",
                    "exact", "program", "ideal", "up_to_local_z"):
            if hasattr(args, key):
                cfg.extra[key] = getattr(args, key)
        cfg.validate(needs_seed=args.subcommand != "kraus")
        try:
            body, code = handler(args, cfg)
        except (ValueError, OSError) as exc:
            raise UsageError(str(exc))
    except UsageError as exc:
        print(f"rus-adqc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE, ""
    text = body if isinstance(body, str) else dumps(body) + "\n"
    if cfg.output:
        Path(cfg.output).write_text(text)
        return code, ""
    return code, text


def main(argv=None) -> int:
    code, text = dispatch(sys.argv[1:] if argv is None else argv)
    if text:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
