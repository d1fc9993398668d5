"""The ``juryrig`` console script (argparse only).

Every subcommand writes one machine-readable document (JSON, or CSV for
``sweep``) to stdout or ``--output``; human notes go to stderr as ``note:``
lines. Each JSON document starts with an ``inputs`` echo of the fully
resolved inputs (profile, signal, seed, tie rule, config file, version), so a
run can be reproduced from its output alone.

    juryrig analyze --lambda 0.3 --q-low 0.6 --q-high 0.7
    juryrig simulate --q 0.55 --signal-cond 1.0 0.7 --state B --seed 7
    juryrig sweep --q-high 0.7 --output fig.csv
    juryrig oracle --q 0.72 --step 0.005
    juryrig extensions targeted --lambda 0.5 --q-low 0.55 --q-high 0.75
    juryrig example

Defaults come from ``juryrig.toml`` (see ``juryrig/config.py``); explicit flags
win. Exit codes: 0 success, 2 bad input (domain, config, usage), 3 internal
consistency failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Optional

from juryrig import __version__
from juryrig import analysis, extensions, oracle, simulate, sweep
from juryrig.config import Config, ConfigError, load_config, resolve_config_path
from juryrig.model import (
    PRIOR, InvariantViolation, JuryrigWarning, ModelDomainError, PopulationProfile,
    Signal, State, TieRule, UNINFORMATIVE, cells, exact_vote_share,
    parse_state, parse_tie, sincere_vote,
)


# --------------------------------------------------------------------------- #
# Shared plumbing
# --------------------------------------------------------------------------- #

def _config(args: argparse.Namespace) -> Config:
    return load_config(resolve_config_path(args.config))


def _profile(args: argparse.Namespace) -> PopulationProfile:
    if args.q is not None:
        if args.q_low is not None or args.q_high is not None:
            raise ModelDomainError("--q cannot be combined with --q-low/--q-high")
        return PopulationProfile.homogeneous(args.q)
    if args.q_low is None and args.q_high is None:
        raise ModelDomainError("no population: pass --q, or --q-low and --q-high")
    q_low = args.q_low if args.q_low is not None else args.q_high
    q_high = args.q_high if args.q_high is not None else args.q_low
    return PopulationProfile(args.lam, q_low, q_high)


def _parse_signal(text: str) -> Signal:
    fields = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep or key.strip() not in ("alpha", "beta"):
            raise ModelDomainError(
                f"--signal expects alpha=A,beta=B, got {text!r}")
        try:
            fields[key.strip()] = float(value)
        except ValueError:
            raise ModelDomainError(
                f"--signal: {value!r} is not a decimal number") from None
    if set(fields) != {"alpha", "beta"}:
        raise ModelDomainError(f"--signal needs both alpha and beta, got {text!r}")
    return Signal(fields["alpha"], fields["beta"])


def _signal(args: argparse.Namespace) -> Signal:
    if args.signal is not None:
        return _parse_signal(args.signal)
    if args.signal_cond is not None:
        return Signal.from_conditionals(*args.signal_cond)
    return UNINFORMATIVE


def _finite(x: Optional[float]):
    """JSON has no infinities; they are spelled as strings."""
    if x is not None and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _inputs(args: argparse.Namespace, cfg: Config, **extra) -> dict:
    out = {"command": args.command, "version": __version__,
           "config": None if cfg.path is None else str(cfg.path)}
    out.update(extra)
    return out


def _emit(args: argparse.Namespace, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.output:
        Path(args.output).write_text(text)
        print(f"note: wrote {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _emit_json(args: argparse.Namespace, doc: dict) -> None:
    _emit(args, json.dumps(doc, indent=2))


# --------------------------------------------------------------------------- #
# analyze / oracle
# --------------------------------------------------------------------------- #

def _thresholds(profile: PopulationProfile, scan_step: float) -> dict:
    out = {}
    for name, fn, arg in (("q_ni", analysis.q_ni, profile.lam),
                          ("q_bar", analysis.q_bar, profile.lam),
                          ("lambda_under", analysis.lambda_under, profile.q_high)):
        try:
            out[name] = _finite(fn(arg))
        except ModelDomainError:
            out[name] = None
    two_class = PRIOR < profile.q_low < profile.q_high
    out["min_manipulable_lambda"] = (
        analysis.min_manipulable_lambda(profile.q_low, profile.q_high)
        if two_class else None)
    out["bias_intervals"] = None
    if two_class and profile.q_high > analysis.TWO_THIRDS:
        out["bias_intervals"] = {
            sign: [list(iv) for iv in analysis.bias_intervals(
                profile.q_low, profile.q_high, sign, scan_step)]
            for sign in ("positive", "negative")}
    return out


def _cmd_analyze(args: argparse.Namespace) -> int:
    cfg = _config(args)
    tie = parse_tie(args.tie) if args.tie else cfg.tie
    profile = _profile(args)
    report = analysis.classify(profile, tol=cfg.tolerance)
    doc = {"inputs": _inputs(args, cfg, profile=profile.as_dict(),
                             tie=tie.value, tolerance=cfg.tolerance,
                             scan_step=args.scan_step)}
    doc.update(report.as_dict())
    if report.classification is analysis.Classification.MANIPULABLE:
        doc["bias"] = analysis.bias_direction(profile).as_dict()
    doc["thresholds"] = _thresholds(profile, args.scan_step)
    if tie is TieRule.FAVOR_B:
        witness = oracle.favor_b_witness(profile)
        doc["favor_b_witness"] = None if witness is None else witness.as_dict()
    _emit_json(args, doc)
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    cfg = _config(args)
    step = args.step if args.step is not None else cfg.oracle_step
    profile = _profile(args)
    verdict = oracle.verify_closure(profile, step)
    grid = verdict.grid.as_dict()
    if not args.full:
        grid.pop("optimal_set")
    doc = {"inputs": _inputs(args, cfg, profile=profile.as_dict(), step=step,
                             tie="favor-a")}
    doc["grid"] = grid
    doc.update(verdict.as_dict())
    _emit_json(args, doc)
    if not verdict.ok:
        for line in verdict.discrepancies:
            print(f"error: {line}", file=sys.stderr)
        return 3
    return 0


# --------------------------------------------------------------------------- #
# simulate
# --------------------------------------------------------------------------- #

def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    sim = cfg.simulate
    overrides = {key: value for key, value in
                 (("n_voters", args.n), ("trials", args.trials),
                  ("seed", args.seed)) if value is not None}
    if args.tie:
        overrides["tie"] = parse_tie(args.tie)
    if args.fixed_split:
        overrides["fixed_split"] = True
    sim = replace(sim, **overrides)
    profile = _profile(args)
    signal = _signal(args)
    states = [parse_state(args.state)] if args.state else list(State)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", JuryrigWarning)
        results = [simulate.simulate(profile, signal, s, sim, args.tallies)
                   for s in states]
    for w in caught:
        print(f"note: {w.message}", file=sys.stderr)
    doc = {"inputs": _inputs(args, cfg, profile=profile.as_dict(),
                             signal=signal.as_dict(), **sim.as_dict())}
    doc["results"] = [r.as_dict() for r in results]
    doc["single_voter_correct"] = {
        s.value: simulate.single_voter(profile, signal, s, sim.tie) for s in states}
    _emit_json(args, doc)
    return 0


# --------------------------------------------------------------------------- #
# sweep
# --------------------------------------------------------------------------- #

def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _config(args)
    spec = cfg.sweep
    overrides = {}
    if args.q_high is not None:
        overrides["q_high"] = args.q_high
    if args.q_low_range is not None:
        overrides["q_low"] = tuple(args.q_low_range)
    elif args.q_high is not None and "sweep.q_low" not in cfg.explicit:
        overrides["q_low"] = sweep.fit_q_low(spec.q_low, args.q_high)
    if args.lambda_range is not None:
        overrides["lam"] = tuple(args.lambda_range)
    if args.no_oracle:
        overrides["oracle_step"] = None
    elif args.oracle_step is not None:
        overrides["oracle_step"] = args.oracle_step
    spec = replace(spec, **overrides)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", JuryrigWarning)
        rows = sweep.run_sweep(spec)
    for w in caught:
        print(f"note: {w.message}", file=sys.stderr)
    with_oracle = spec.oracle_step is not None
    if args.json:
        doc = {"inputs": _inputs(args, cfg, sweep=spec.as_dict())}
        header = sweep.COLUMNS + (("oracle_agrees",) if with_oracle else ())
        doc["rows"] = [dict(zip(header, r.cells())) for r in rows]
        _emit_json(args, doc)
    else:
        _emit(args, sweep.render_csv(rows, with_oracle))
    if with_oracle and any(r.oracle_agrees is False for r in rows):
        return 3
    return 0


# --------------------------------------------------------------------------- #
# extensions
# --------------------------------------------------------------------------- #

def _continuous(args: argparse.Namespace) -> Optional[extensions.ContinuousProfile]:
    if args.profile_file is not None:
        return extensions.read_continuous_profile(args.profile_file)
    if args.uniform is not None:
        return extensions.ContinuousProfile.uniform(*args.uniform)
    return None


def _cmd_ext_continuous(args: argparse.Namespace) -> int:
    cfg = _config(args)
    step = args.step if args.step is not None else cfg.oracle_step
    profile = _continuous(args)
    if profile is None:
        raise ModelDomainError("continuous: pass --profile-file PATH or --uniform LO HI")
    report = extensions.continuous_classify(profile, step)
    doc = {"inputs": _inputs(args, cfg, variant="continuous",
                             profile=profile.as_dict(), step=step)}
    doc.update(report.as_dict())
    _emit_json(args, doc)
    return 0


def _cmd_ext_targeted(args: argparse.Namespace) -> int:
    cfg = _config(args)
    continuous = _continuous(args)
    if continuous is not None:
        report = extensions.targeted_classify_continuous(continuous)
        profile_doc = continuous.as_dict()
    else:
        profile = _profile(args)
        report = extensions.targeted_classify(profile)
        profile_doc = profile.as_dict()
    doc = {"inputs": _inputs(args, cfg, variant="targeted", profile=profile_doc)}
    doc.update(report.as_dict())
    _emit_json(args, doc)
    return 0


def _cmd_ext_strong(args: argparse.Namespace) -> int:
    cfg = _config(args)
    profile = _continuous(args) or _profile(args)
    report = extensions.strongly_targeted_classify(profile)
    doc = {"inputs": _inputs(args, cfg, variant="strongly-targeted",
                             profile=profile.as_dict())}
    doc.update(report.as_dict())
    _emit_json(args, doc)
    return 0


def _cmd_ext_public(args: argparse.Namespace) -> int:
    cfg = _config(args)
    step = args.step if args.step is not None else cfg.public_step
    profile = _profile(args)
    report = extensions.public_persuasion_compare(profile, step)
    doc = {"inputs": _inputs(args, cfg, variant="public",
                             profile=profile.as_dict(), step=step)}
    doc.update(report.as_dict())
    _emit_json(args, doc)
    return 0


# --------------------------------------------------------------------------- #
# example
# --------------------------------------------------------------------------- #

EXAMPLE_ACCURACY = 0.55
EXAMPLE_SCHEMES = (("always-a-when-a", (1.0, 0.7)),
                   ("biased-towards-b", (0.53, 0.43)))


def _scheme(name: str, conditionals: tuple[float, float]) -> dict:
    q = EXAMPLE_ACCURACY
    signal = Signal.from_conditionals(*conditionals)
    profile = PopulationProfile.homogeneous(q)
    posteriors = []
    for cell in cells(q):
        belief = cell.posterior(signal)
        posteriors.append({
            "exogenous": cell.exo.value, "message": cell.message.value,
            "posterior_a": None if belief is None else belief.p_theta_a,
            "vote": None if belief is None else sincere_vote(belief).value})
    per_state = {}
    for s in State:
        share = exact_vote_share(profile, signal, s)
        per_state[s.value] = {
            "single_voter_correct": simulate.single_voter(q, signal, s),
            "a_share": share, "b_share": 1.0 - share}
    gap = simulate.single_voter_majority_gap(q, signal)
    return {"name": name,
            "conditionals": {"p_pro_a_given_theta_a": conditionals[0],
                             "p_pro_a_given_theta_b": conditionals[1]},
            "signal": signal.as_dict(), "posteriors": posteriors,
            "states": per_state, "majority": [g.as_dict() for g in gap]}


def _cmd_example(args: argparse.Namespace) -> int:
    cfg = _config(args)
    baseline = {"single_voter_correct": EXAMPLE_ACCURACY,
                "majority_correct_n1001": simulate.condorcet_exact(EXAMPLE_ACCURACY, 1001)}
    doc = {"inputs": _inputs(args, cfg, accuracy=EXAMPLE_ACCURACY),
           "no_designer": baseline,
           "schemes": [_scheme(n, c) for n, c in EXAMPLE_SCHEMES]}
    _emit_json(args, doc)
    return 0


# --------------------------------------------------------------------------- #
# Wiring
# --------------------------------------------------------------------------- #

def _common_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", default=None,
                   help="run configuration (default: $JURYRIG_CONFIG, then "
                        "./juryrig.toml, then built-in defaults)")
    p.add_argument("--output", "-o", metavar="PATH", default=None,
                   help="write the document here instead of stdout")
    return p


def _profile_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("population")
    g.add_argument("--lambda", dest="lam", type=float, default=0.0,
                   metavar="L", help="share of low-accuracy voters (default 0)")
    g.add_argument("--q-low", type=float, default=None, metavar="Q")
    g.add_argument("--q-high", type=float, default=None, metavar="Q")
    g.add_argument("--q", type=float, default=None, metavar="Q",
                   help="homogeneous accuracy (same as --q-low Q --q-high Q)")
    return p


def _continuous_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--profile-file", metavar="PATH", default=None,
                   help="continuous accuracy density (breakpoint/value table)")
    g.add_argument("--uniform", type=float, nargs=2, metavar=("LO", "HI"),
                   default=None, help="uniform accuracy density on [LO, HI]")
    return p


def _add_extensions_group(sub: argparse._SubParsersAction, common, prof) -> None:
    ext = sub.add_parser("extensions",
                         help="continuous, targeted, strongly targeted and public variants")
    esub = ext.add_subparsers(dest="variant", required=True, metavar="VARIANT")
    cont = _continuous_parent()

    p = esub.add_parser("continuous", parents=[common, cont],
                        help="uniform signal, continuous accuracy density")
    p.add_argument("--step", type=float, default=None)
    p.set_defaults(func=_cmd_ext_continuous)

    p = esub.add_parser("targeted", parents=[common, prof, cont],
                        help="one signal per accuracy class")
    p.set_defaults(func=_cmd_ext_targeted)

    p = esub.add_parser("strongly-targeted", parents=[common, prof, cont],
                        help="signals per accuracy class and exogenous realization")
    p.set_defaults(func=_cmd_ext_strong)

    p = esub.add_parser("public", parents=[common, prof],
                        help="best public signal against private persuasion")
    p.add_argument("--step", type=float, default=None)
    p.set_defaults(func=_cmd_ext_public)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="juryrig",
        description="when can a designer's private signal overturn majority "
                    "voting, and with which signals")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = _common_parent()
    prof = _profile_parent()
    tie_opt = argparse.ArgumentParser(add_help=False)
    tie_opt.add_argument("--tie", choices=["favor-a", "favor-b"], default=None,
                         help="tie rule (default from config: favor-a)")

    p = sub.add_parser("analyze", parents=[common, prof, tie_opt],
                       help="classify a profile and report its optimal signals")
    p.add_argument("--scan-step", type=float, default=1e-3, metavar="S",
                   help="lambda scan step for the bias intervals (default 0.001)")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("simulate", parents=[common, prof, tie_opt],
                       help="Monte Carlo elections with a finite electorate")
    sig = p.add_mutually_exclusive_group()
    sig.add_argument("--signal", metavar="alpha=A,beta=B", default=None,
                     help="designer signal as its posterior pair")
    sig.add_argument("--signal-cond", type=float, nargs=2, metavar=("PA", "PB"),
                     default=None,
                     help="designer signal as P(pro-a | A), P(pro-a | B)")
    p.add_argument("--state", choices=["A", "B"], default=None,
                   help="state of the world (default: both)")
    p.add_argument("--n", type=int, default=None, help="voters per election")
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--fixed-split", action="store_true",
                   help="exactly round(lambda * n) low-accuracy voters")
    p.add_argument("--tallies", action="store_true",
                   help="include every trial's A tally")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", parents=[common],
                       help="classify a (q_low, lambda) grid at fixed q_high")
    p.add_argument("--q-high", type=float, default=None)
    p.add_argument("--q-low-range", type=float, nargs=3, default=None,
                   metavar=("START", "STOP", "STEP"))
    p.add_argument("--lambda-range", type=float, nargs=3, default=None,
                   metavar=("START", "STOP", "STEP"))
    p.add_argument("--oracle-step", type=float, default=None,
                   help="cross-check each cell with the grid oracle at this step")
    p.add_argument("--no-oracle", action="store_true",
                   help="skip the grid cross-check")
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--csv", action="store_true", help="CSV rows (default)")
    fmt.add_argument("--json", action="store_true", help="JSON document")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("oracle", parents=[common, prof],
                       help="brute-force grid search and candidate-closure check")
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--full", action="store_true",
                   help="list every optimal grid signal")
    p.set_defaults(func=_cmd_oracle)

    _add_extensions_group(sub, common, prof)

    p = sub.add_parser("example", parents=[common],
                       help="replay the two-scheme illustrative example")
    p.set_defaults(func=_cmd_example)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as e:
        print(f"error: internal consistency check failed: {e}", file=sys.stderr)
        return 3
    except (ModelDomainError, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
