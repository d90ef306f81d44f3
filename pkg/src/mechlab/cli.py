"""Command-line interface: audit, attack, theorem, independence.

Scenarios resolve in precedence order: built-in defaults, then a JSON
config file (--config), then the MECHLAB_SEED environment fallback for
the seed, then explicit flags.  Exit codes: 0 when every assertion the
command makes passes, 1 when an axiom or expected-pattern assertion
fails, 2 for configuration or tool errors (argparse uses 2 as well).

Reports are written as sorted-key JSON plus one CSV per section; with
--deterministic the JSON carries no timestamps or wall-clock data, so
identical scenarios produce byte-identical files.  --figures additionally
renders PNG views of each section next to the delimited output.
"""

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field, fields

from . import __version__
from .attack import KIND_MISREPORT, KIND_MULTI_SYBIL, KIND_SYBIL, exploit_scan
from .axioms import ALL_AXIOMS, independence_matrix, run_all_checks
from .core import BidProfile, MechanismLabError, ToleranceConfig
from .mechanisms import BUILTIN_NAMES, make_mechanism, registered_names
from .quadrature import QuadratureConfig
from .report import (
    GAINS_CSV_COLUMNS,
    MATRIX_CSV_COLUMNS,
    ReportDocument,
    TRACE_CSV_COLUMNS,
    WITNESS_CSV_COLUMNS,
    matrix_text_table,
    stamp_now,
    write_csv,
)
from .search import ProfileSampler, SearchGrid
from .theorem import (
    ALL_TRACES,
    IdentityPreconditionError,
    TRACE_INDUCTION_STEP,
    TRACE_PAYOFF_FLOOR,
    TRACE_REPLICATION_CHAIN,
    TRACE_REPLICATION_LIMIT,
    TRACE_RIVAL_MONOTONICITY,
    TRACE_UNIFORM_AVERAGE,
    induction_step_trace,
    payoff_floor_trace,
    replication_chain_check,
    replication_limit_trace,
    rival_monotonicity_trace,
    uniform_average_trace,
)

SEED_ENV_VAR = "MECHLAB_SEED"
FORMATS = ("json", "csv", "both")
TARGETS = (KIND_MISREPORT, KIND_SYBIL, KIND_MULTI_SYBIL)


class ConfigError(MechanismLabError):
    """A scenario could not be resolved into a runnable configuration."""


@dataclass
class ScenarioConfig:
    """Fully resolved inputs for one command run."""

    mechanism: str = "spa"
    c: float = 0.5
    r: float = 4.0
    payment_mode: str = None
    grid: SearchGrid = field(default_factory=SearchGrid)
    n_min: int = 2
    n_max: int = 5
    profile_budget: int = 500
    seed: int = 42
    jobs: int = 1
    refine_iters: int = 20
    target: str = KIND_SYBIL
    k: int = 3
    lemmas: tuple = ALL_TRACES
    u: float = 7.0
    v: float = 3.0
    averaging_u: tuple = (1.0, 2.0, 5.0)
    induction_profile: BidProfile = field(
        default_factory=lambda: BidProfile.from_bids((2.0, 7.0, 5.0)))
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    out: str = "mechlab_report"
    format: str = "both"
    deterministic: bool = False
    figures: bool = False

    def validate(self) -> None:
        if self.mechanism not in registered_names():
            raise ConfigError(f"unknown mechanism {self.mechanism!r}; "
                              f"registered: {sorted(registered_names())}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.target not in TARGETS:
            raise ConfigError(f"target must be one of {TARGETS}, got {self.target!r}")
        if not (1 <= self.n_min <= self.n_max):
            raise ConfigError(f"need 1 <= n_min <= n_max, got [{self.n_min}, {self.n_max}]")
        if self.profile_budget < 1:
            raise ConfigError(f"profile_budget must be >= 1, got {self.profile_budget}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if self.k < 1:
            raise ConfigError(f"k must be >= 1, got {self.k}")
        if self.refine_iters < 0:
            raise ConfigError(f"refine_iters must be >= 0, got {self.refine_iters}")
        unknown = [name for name in self.lemmas if name not in ALL_TRACES]
        if unknown:
            raise ConfigError(f"unknown trace names {unknown}; available: {list(ALL_TRACES)}")

    def scenario_dict(self, command: str) -> dict:
        base = {
            "mechanism": self.mechanism,
            "c": self.c,
            "r": self.r,
            "payment_mode": self.payment_mode,
            "grid": self.grid.to_dict(),
            "n_min": self.n_min,
            "n_max": self.n_max,
            "profile_budget": self.profile_budget,
            "seed": self.seed,
            "tolerances": self.tolerances.to_dict(),
            "quadrature": self.quadrature.to_dict(),
        }
        if command == "attack":
            base.update({"target": self.target, "k": self.k,
                         "refine_iters": self.refine_iters})
        if command == "theorem":
            base.update({"lemmas": list(self.lemmas), "u": self.u, "v": self.v,
                         "averaging_u": list(self.averaging_u),
                         "induction_profile": self.induction_profile.to_dict()})
        return base

    def build_mechanism(self):
        try:
            return make_mechanism(self.mechanism, c=self.c, r=self.r,
                                  payment_mode=self.payment_mode,
                                  tolerances=self.tolerances)
        except (ValueError, MechanismLabError) as error:
            raise ConfigError(str(error)) from error

    def sampler(self) -> ProfileSampler:
        return ProfileSampler(self.grid, self.n_min, self.n_max, self.seed)


def parse_grid(text: str) -> SearchGrid:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must look like lo:hi:step, got {text!r}")
    try:
        lo, hi, step = (float(p) for p in parts)
        return SearchGrid(lo, hi, step)
    except ValueError as error:
        raise ConfigError(f"bad grid {text!r}: {error}") from error


def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as error:
        raise ConfigError(f"cannot read config file {path}: {error}") from error
    except json.JSONDecodeError as error:
        raise ConfigError(f"config file {path} is not valid JSON: {error}") from error
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    known = {f.name for f in fields(ScenarioConfig)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"unknown config keys {unknown}; known keys: {sorted(known)}")
    return data


def _config_from_sources(args: argparse.Namespace) -> ScenarioConfig:
    config = ScenarioConfig()
    file_data = _load_config_file(args.config) if args.config else {}

    def structured(key, builder):
        if key in file_data:
            try:
                setattr(config, key, builder(file_data[key]))
            except (TypeError, ValueError, KeyError, MechanismLabError) as error:
                raise ConfigError(f"bad config value for {key!r}: {error}") from error

    structured("grid", lambda d: SearchGrid(**d))
    structured("tolerances", lambda d: ToleranceConfig(**d))
    structured("quadrature", lambda d: QuadratureConfig(**d))
    structured("induction_profile",
               lambda d: BidProfile(tuple(d["agents"]), tuple(d["bids"])))
    structured("lemmas", tuple)
    structured("averaging_u", lambda v: tuple(float(x) for x in v))
    for key, value in file_data.items():
        if key in ("grid", "tolerances", "quadrature", "induction_profile",
                   "lemmas", "averaging_u"):
            continue
        setattr(config, key, value)

    if "seed" not in file_data and getattr(args, "seed", None) is None:
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed is not None:
            try:
                config.seed = int(env_seed)
            except ValueError as error:
                raise ConfigError(f"{SEED_ENV_VAR} must be an integer, "
                                  f"got {env_seed!r}") from error

    overrides = {
        "mechanism": args.mechanism, "c": args.c, "r": args.r,
        "payment_mode": args.payment_mode, "n_min": args.n_min, "n_max": args.n_max,
        "profile_budget": args.profile_budget, "seed": args.seed, "jobs": args.jobs,
        "refine_iters": args.refine_iters, "out": args.out, "format": args.format,
        "target": getattr(args, "target", None), "k": getattr(args, "k", None),
        "u": getattr(args, "u", None), "v": getattr(args, "v", None),
    }
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    if args.grid is not None:
        config.grid = parse_grid(args.grid)
    if getattr(args, "lemmas", None):
        config.lemmas = tuple(t.strip() for t in args.lemmas.split(",") if t.strip())
    if args.deterministic:
        config.deterministic = True
    if args.figures:
        config.figures = True
    if args.command == "theorem" and args.n_max is None and "n_max" not in file_data:
        config.n_max = 50
    config.validate()
    return config


# --- output plumbing --------------------------------------------------------

def _stem(config: ScenarioConfig) -> str:
    out = config.out
    return out[:-5] if out.endswith(".json") else out


def _emit(config: ScenarioConfig, report: ReportDocument, csv_sections: dict,
          figure_jobs: list) -> None:
    stem = _stem(config)
    if config.format in ("json", "both"):
        report.write_json(stem + ".json")
    if config.format in ("csv", "both"):
        for name, (kind, columns, rows) in csv_sections.items():
            write_csv(f"{stem}_{name}.csv", kind, columns, rows)
    if config.figures:
        for render in figure_jobs:
            render(stem)


def _document(command: str, config: ScenarioConfig, sections: dict,
              timings: dict) -> ReportDocument:
    return ReportDocument(
        command=command,
        scenario=config.scenario_dict(command),
        sections=sections,
        version=__version__,
        timings=None if config.deterministic else timings,
        created_utc=None if config.deterministic else stamp_now(),
    )


def _witness_rows(reports: dict) -> list:
    rows = []
    for axiom, report in reports.items():
        for witness in report.witnesses:
            rows.append((axiom, repr(witness.profile), witness.agent,
                         json.dumps(witness.detail, sort_keys=True), witness.violation))
    return rows


# --- commands ----------------------------------------------------------------

def cmd_audit(config: ScenarioConfig):
    """All seven axiom checkers against one mechanism; exit 0 iff all pass."""
    mech = config.build_mechanism()
    profiles = config.sampler().sample(config.profile_budget)
    started = time.perf_counter()
    reports = run_all_checks(mech, profiles, config.grid, config.quadrature,
                             config.tolerances, seed=config.seed, jobs=config.jobs)
    elapsed = time.perf_counter() - started

    for axiom in ALL_AXIOMS:
        rep = reports[axiom]
        print(f"{'PASS' if rep.passed else 'FAIL'} {axiom} "
              f"(violations {rep.violations_found}/{rep.profiles_tested} profiles)")
    all_pass = all(r.passed for r in reports.values())
    print(f"RESULT {mech.name}: {'all axioms pass' if all_pass else 'axiom failures found'} "
          f"within the declared search scope")

    sections = {"axioms": {a: reports[a].to_dict() for a in ALL_AXIOMS}}
    document = _document("audit", config, sections, {"audit_seconds": elapsed})
    verdicts = {mech.name: {a: reports[a].verdict for a in ALL_AXIOMS}}

    def figure(stem):
        from .figures import plot_independence_matrix
        plot_independence_matrix(verdicts, f"{stem}_axioms.png")

    _emit(config, document,
          {"witnesses": ("witnesses", WITNESS_CSV_COLUMNS, _witness_rows(reports))},
          [figure])
    return (0 if all_pass else 1), document


def cmd_attack(config: ScenarioConfig):
    """Deviation scan for one target kind; informational, exit 0 on completion."""
    mech = config.build_mechanism()
    started = time.perf_counter()
    scan = exploit_scan(mech, config.sampler(), config.profile_budget, config.grid,
                        config.refine_iters, config.quadrature, config.tolerances,
                        kinds=(config.target,), k=config.k)
    elapsed = time.perf_counter() - started

    worst = scan.worst
    print(f"scanned {scan.profiles_scanned} profiles ({config.target}); "
          f"max gain {scan.max_gain:.6g}, positive in {scan.positive_gains} "
          f"of {len(scan.gains)} searches")
    print(f"worst deviation: agent {worst.deviator} on {worst.profile!r} "
          f"-> bid {worst.chosen_bid:g}, gain {worst.gain:.6g}")

    sections = {"scan": scan.to_dict()}
    document = _document("attack", config, sections, {"attack_seconds": elapsed})

    def figure(stem):
        from .figures import plot_gain_histogram
        plot_gain_histogram(scan.gains, f"{stem}_gains.png",
                            title=f"{mech.name}: {config.target} gains")

    _emit(config, document,
          {"gains": ("gains", GAINS_CSV_COLUMNS, list(scan.records))},
          [figure])
    return 0, document


def _run_traces(mech, config: ScenarioConfig):
    grid = config.grid
    quad, tol = config.quadrature, config.tolerances
    floor_points = [p for p in grid.points(extra=(config.v, config.u))
                    if p <= config.u]
    builders = {
        TRACE_REPLICATION_LIMIT: lambda: replication_limit_trace(
            mech, config.u, config.v, config.n_max, tol),
        TRACE_REPLICATION_CHAIN: lambda: replication_chain_check(
            mech, config.u, config.v, config.n_max, quad, tol),
        TRACE_PAYOFF_FLOOR: lambda: payoff_floor_trace(
            mech, config.u, floor_points, quad, tol),
        TRACE_RIVAL_MONOTONICITY: lambda: rival_monotonicity_trace(
            mech, config.u, SearchGrid(0.0, config.u, config.u / 20.0), quad, tol),
        TRACE_UNIFORM_AVERAGE: lambda: uniform_average_trace(
            mech, config.averaging_u, quad, tol),
        TRACE_INDUCTION_STEP: lambda: induction_step_trace(
            mech, config.induction_profile, quad, tol),
    }
    traces, errors = {}, {}
    for name in config.lemmas:
        try:
            traces[name] = builders[name]()
        except IdentityPreconditionError as error:
            errors[name] = str(error)
    return traces, errors


def cmd_theorem(config: ScenarioConfig):
    """Proof-step traces against one mechanism; exit 0 iff all consistent."""
    mech = config.build_mechanism()
    started = time.perf_counter()
    traces, errors = _run_traces(mech, config)
    elapsed = time.perf_counter() - started

    for name in config.lemmas:
        if name in errors:
            print(f"ERROR {name}: {errors[name]}")
        else:
            trace = traces[name]
            print(f"{'PASS' if trace.consistent else 'FAIL'} {name} "
                  f"(worst slack {trace.worst_slack:.6g})")
    all_consistent = not errors and all(t.consistent for t in traces.values())
    print(f"RESULT {mech.name}: "
          f"{'all traces consistent' if all_consistent else 'trace violations found'}")

    sections = {
        "traces": {name: trace.to_dict() for name, trace in traces.items()},
        "precondition_errors": errors,
    }
    document = _document("theorem", config, sections, {"theorem_seconds": elapsed})
    csv_sections = {name: ("trace", TRACE_CSV_COLUMNS, trace.csv_rows())
                    for name, trace in traces.items()}

    def figure(stem):
        from .figures import plot_trace
        for name, trace in traces.items():
            plot_trace(trace, f"{stem}_{name}.png")

    _emit(config, document, csv_sections, [figure])
    return (0 if all_consistent else 1), document


def cmd_independence(config: ScenarioConfig):
    """Full checker-by-mechanism matrix; exit 0 iff the expected pattern holds."""
    if len(config.grid.base_points()) < 2:
        print(f"warning: search grid {config.grid.describe()} is degenerate; "
              f"verdicts cover almost no deviations", file=sys.stderr)
    mechanisms = None
    if config.mechanism not in BUILTIN_NAMES:
        extra = config.build_mechanism()
        suite = [make_mechanism(name, c=config.c, r=config.r,
                                tolerances=config.tolerances)
                 for name in BUILTIN_NAMES]
        mechanisms = suite + [extra]

    started = time.perf_counter()
    matrix = independence_matrix(config.grid, config.profile_budget,
                                 (config.n_min, config.n_max), config.seed,
                                 config.quadrature, config.tolerances,
                                 mechanisms=mechanisms, jobs=config.jobs,
                                 c=config.c, r=config.r)
    elapsed = time.perf_counter() - started

    verdicts = matrix.verdicts()
    table = matrix_text_table(verdicts)
    print(table)
    if matrix.pattern_ok:
        print("RESULT expected independence pattern reproduced "
              f"({len(matrix.pattern_checked)} built-in rows)")
    else:
        for name, axiom, got, expected in matrix.mismatches:
            print(f"MISMATCH {name}/{axiom}: got {got}, expected {expected}")
        print("RESULT expected independence pattern NOT reproduced")

    sections = {"independence": matrix.to_dict()}
    document = _document("independence", config, sections,
                         {"independence_seconds": elapsed})
    rows = [(name, axiom, verdicts[name][axiom])
            for name in verdicts for axiom in verdicts[name]]

    def figure(stem):
        from .figures import plot_independence_matrix
        plot_independence_matrix(verdicts, f"{stem}_matrix.png")

    if config.format in ("csv", "both"):
        with open(f"{_stem(config)}_matrix.txt", "w", encoding="utf-8") as handle:
            handle.write(table + "\n")
    _emit(config, document,
          {"matrix": ("matrix", MATRIX_CSV_COLUMNS, rows)},
          [figure])
    return (0 if matrix.pattern_ok else 1), document


# --- argument parsing ---------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scenario file; flags override its fields")
    common.add_argument("--mechanism", help=f"mechanism name (built-ins: {', '.join(BUILTIN_NAMES)})")
    common.add_argument("--c", type=float, help="proportional price coefficient")
    common.add_argument("--r", type=float, help="reserve price for reserve_spa")
    common.add_argument("--payment-mode", dest="payment_mode",
                        choices=("myerson", "explicit"),
                        help="override a mechanism's default payment rule")
    common.add_argument("--grid", help="deviation/bid grid as lo:hi:step")
    common.add_argument("--n-min", dest="n_min", type=int, help="smallest population sampled")
    common.add_argument("--n-max", dest="n_max", type=int,
                        help="largest population sampled (theorem: trace length, default 50)")
    common.add_argument("--profile-budget", dest="profile_budget", type=int,
                        help="number of sampled profiles")
    common.add_argument("--seed", type=int,
                        help=f"sampling seed (fallback: ${SEED_ENV_VAR}, then 42)")
    common.add_argument("--jobs", type=int, help="parallel checker execution")
    common.add_argument("--refine-iters", dest="refine_iters", type=int,
                        help="golden-section refinement iterations")
    common.add_argument("--out", help="output path stem (default mechlab_report)")
    common.add_argument("--format", choices=FORMATS, help="report formats to write")
    common.add_argument("--deterministic", action="store_true",
                        help="strip timestamps/timings for byte-identical reports")
    common.add_argument("--figures", action="store_true",
                        help="render PNG figures next to the reports")

    parser = argparse.ArgumentParser(
        prog="mechlab",
        description="Audit, attack, and trace variable-population single-item mechanisms.")
    parser.add_argument("--version", action="version", version=f"mechlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("audit", parents=[common],
                   help="run all seven axiom checkers against one mechanism")

    attack = sub.add_parser("attack", parents=[common],
                            help="search misreport/sybil deviations over sampled profiles")
    attack.add_argument("--target", choices=TARGETS, help="deviation family to search")
    attack.add_argument("--k", type=int, help="sybil count for multi_sybil")

    theorem = sub.add_parser("theorem", parents=[common],
                             help="replay the uniqueness argument's numerical steps")
    theorem.add_argument("--lemmas", help="comma-separated subset of: " + ", ".join(ALL_TRACES))
    theorem.add_argument("--u", type=float, help="lead bid for traces (default 7)")
    theorem.add_argument("--v", type=float, help="rival bid for traces (default 3)")

    sub.add_parser("independence", parents=[common],
                   help="check every built-in against every axiom")
    return parser


_COMMANDS = {
    "audit": cmd_audit,
    "attack": cmd_attack,
    "theorem": cmd_theorem,
    "independence": cmd_independence,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config_from_sources(args)
        code, _ = _COMMANDS[args.command](config)
        return code
    except ConfigError as error:
        print(f"config error: {error}", file=sys.stderr)
        return 2
    except MechanismLabError as error:
        print(f"error: {error}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
