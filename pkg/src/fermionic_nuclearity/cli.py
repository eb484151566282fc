"""Command-line driver.

Exit codes: 0 all checks held, 1 a numerical contract was violated, 2 malformed
input, 3 a quadrature refinement did not converge.
"""
import argparse
from dataclasses import asdict, dataclass, fields
import json
import os
import sys

from . import audits, ising, reports
from .config import MAX_MODES
from .errors import DomainError, WedgeConditionError
from .golden import REFERENCE_ENERGY, REFERENCE_SCENARIO, load_golden

EXIT_OK, EXIT_VIOLATED, EXIT_MALFORMED, EXIT_UNCONVERGED = 0, 1, 2, 3

MAX_BASIS = 64
MAX_POINTS = 10**6

COMMANDS = ("verify car", "verify derivations", "verify identity", "verify estimate",
            "bound", "fermi-bose", "intersect", "ising", "energy")

# per-command defaults for fields whose sensible value depends on the command
_COMMAND_DEFAULTS = {
    "verify car": {"modes": 4, "trials": 100},
    "verify derivations": {"modes": 4, "trials": 500},
    "verify identity": {"modes": 4, "trials": 500},
    "verify estimate": {"modes": 4, "trials": 500},
    "bound": {"modes": 4, "trials": 1},
    "fermi-bose": {"modes": 6, "trials": 100},
}


@dataclass
class RunConfig:
    command: str
    modes: int = 4
    trials: int = 100
    seed: int = 0
    degree: int = 3
    samples: int = 16
    mass: float = 1.0
    x0: float = 0.0
    x1: float = -1.0
    beta: float = 1.0
    basis: int = 8
    kappa: float = 1.0
    theta_max: float = 12.0
    points: int = 2000
    tol_structural: float = 1e-10
    tol_derived: float = 1e-9
    output: str = None
    csv: str = None


_INT_FIELDS = {"modes", "trials", "seed", "degree", "samples", "basis", "points"}
_STR_FIELDS = {"output", "csv"}
CONFIG_KEYS = {f.name for f in fields(RunConfig)} - {"command"}


class ConfigError(Exception):
    """Malformed input; reported as a one-line diagnostic with exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common_options():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    g = p.add_argument_group("parameters (defaults in brackets; flags override --config)")
    g.add_argument("--modes", type=int, help=f"one-particle dimension d, at most {MAX_MODES} [4; fermi-bose 6]")
    g.add_argument("--trials", type=int, help="random instances [car 100, lemma/identity/estimate 500, fermi-bose 100]")
    g.add_argument("--seed", type=int, help="RNG seed [0]")
    g.add_argument("--degree", type=int, help="largest number n of one-particle vectors in the expansion [3]")
    g.add_argument("--samples", type=int, help="operators sampled for the empirical nuclear sum [16]")
    g.add_argument("--mass", type=float, help="particle mass m [1.0]")
    g.add_argument("--x0", type=float, help="time component of the translation x [0.0]")
    g.add_argument("--x1", type=float, help="space component of the translation x [-1.0]")
    g.add_argument("--beta", type=float, help="inverse temperature for the energy report [1.0]")
    g.add_argument("--basis", type=int, help=f"rapidity basis size J, at most {MAX_BASIS} [8]")
    g.add_argument("--kappa", type=float, help="basis scale kappa [1.0]")
    g.add_argument("--theta-max", dest="theta_max", type=float, help="rapidity cutoff [12.0]")
    g.add_argument("--points", type=int, help=f"quadrature points, multiple of 20, at most {MAX_POINTS} [2000]")
    g.add_argument("--tol-structural", dest="tol_structural", type=float, help="structural tolerance [1e-10]")
    g.add_argument("--tol-derived", dest="tol_derived", type=float, help="derived-quantity tolerance [1e-9]")
    g.add_argument("--config", help="JSON file with any of the parameter names above as keys")
    g.add_argument("--output", help="write the JSON report here instead of stdout")
    g.add_argument("--csv", help="prefix for CSV tables (<prefix>_<table>.csv, header index,value)")
    return p


def build_parser():
    common = _common_options()
    parser = _Parser(prog="fermionic-nuclearity", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    verify = sub.add_parser("verify", parents=[common], help="randomized operator-identity audits")
    verify.add_argument("suite", choices=["car", "derivations", "identity", "estimate"])
    sub.add_parser("bound", parents=[common], help="nuclear bound chain and empirical nuclear sum")
    sub.add_parser("fermi-bose", parents=[common], help="compare fermionic and bosonic bounds")
    sub.add_parser("intersect", parents=[common], help="double-cone intersection on the nested toy fixture")
    sub.add_parser("ising", parents=[common], help="modular nuclearity trace estimates for a wedge")
    sub.add_parser("energy", parents=[common], help="energy nuclearity trace estimates")
    return parser


def _coerce(key, value):
    if key in _STR_FIELDS:
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"config key {key!r} must be a string")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"config key {key!r} must be a number, got {value!r}")
    if key in _INT_FIELDS:
        if value != int(value):
            raise ConfigError(f"config key {key!r} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def _read_config_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    unknown = sorted(set(data) - CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return {k: _coerce(k, v) for k, v in data.items()}


def _check_ranges(cfg):
    def need(ok, msg):
        if not ok:
            raise ConfigError(msg)

    need(1 <= cfg.modes <= MAX_MODES, f"--modes must lie in 1..{MAX_MODES}, got {cfg.modes}")
    need(1 <= cfg.basis <= MAX_BASIS, f"--basis must lie in 1..{MAX_BASIS}, got {cfg.basis}")
    need(1 <= cfg.points <= MAX_POINTS, f"--points must lie in 1..{MAX_POINTS}, got {cfg.points}")
    need(cfg.points % 20 == 0, f"--points must be a multiple of 20, got {cfg.points}")
    need(cfg.trials >= 1, "--trials must be positive")
    need(cfg.samples >= 1, "--samples must be positive")
    need(cfg.degree >= 0, "--degree must be nonnegative")
    need(cfg.seed >= 0, "--seed must be nonnegative")
    for name in ("mass", "kappa", "beta", "theta_max", "tol_structural", "tol_derived"):
        need(getattr(cfg, name) > 0, f"--{name.replace('_', '-')} must be positive")
    threads = os.environ.get("NUCLEARITY_THREADS")
    if threads is not None:
        need(threads.isdigit() and int(threads) >= 1, f"NUCLEARITY_THREADS must be a positive integer, got {threads!r}")


def parse(argv=None):
    """Parse flags and an optional JSON config file into a :class:`RunConfig`.

    Precedence: built-in defaults, then per-command defaults, then the config
    file, then explicit flags. Raises :class:`ConfigError` on malformed input.
    """
    ns = vars(build_parser().parse_args(argv))
    command = ns.pop("command")
    if command == "verify":
        command = f"verify {ns.pop('suite')}"
    values = dict(_COMMAND_DEFAULTS.get(command, {}))
    config_path = ns.pop("config", None)
    if config_path is not None:
        values.update(_read_config_file(config_path))
    values.update(ns)
    cfg = RunConfig(command=command, **values)
    _check_ranges(cfg)
    return cfg


def _grid(cfg):
    return ising.make_grid(cfg.theta_max, cfg.points)


def _matches(cfg, ref, keys):
    return all(getattr(cfg, k) == ref[v] for k, v in keys.items())


_GRID_KEYS = {"basis": "basis_size", "kappa": "kappa", "theta_max": "theta_max", "points": "n_points"}


def _run_ising(cfg):
    scenario = ising.WedgeScenario(cfg.mass, cfg.x0, cfg.x1, cfg.basis, cfg.kappa, _grid(cfg))
    try:
        scenario.validate()
    except WedgeConditionError as exc:
        audit = audits.Audit("ising")
        audit.metrics.update(x=[cfg.x0, cfg.x1], error=str(exc))
        audit.holds("wedge_condition", False)
        return [audit], {}
    reference = _matches(cfg, REFERENCE_SCENARIO, {"mass": "mass", "x0": "x0", "x1": "x1", **_GRID_KEYS})
    golden = load_golden()["modular"] if reference else None
    audit = audits.ising_audit(scenario, golden=golden)
    rep = audit.metrics["report"]
    return [audit], {"sigma_phi": rep["sigma_phi"], "sigma_pi": rep["sigma_pi"], "t_values": rep["t_values"]}


def _run_energy(cfg):
    grid = _grid(cfg)
    reference = _matches(cfg, REFERENCE_ENERGY, {"mass": "mass", **_GRID_KEYS})
    golden = load_golden()["energy"] if reference else None
    ladder = audits.energy_audit(cfg.mass, cfg.basis, cfg.kappa, grid, golden=golden)
    rep = ising.energy_nuclearity_report(cfg.mass, cfg.beta, cfg.basis, cfg.kappa, grid)
    point = audits.Audit("energy[beta]")
    point.converged = rep.converged
    point.metrics.update(report=rep.to_dict())
    point.at_most("grid_doubling_rel_change", rep.rel_change, ising.CONVERGENCE_RTOL)
    point.above("xi_bound_at_least_one", rep.xi_bound, 1.0 - 1e-12)
    return [point, ladder], {"sigma_phi": rep.sigma_phi, "sigma_pi": rep.sigma_pi, "t_values": rep.t_values}


def _run(cfg):
    """Dispatch one command; returns (audits, csv tables)."""
    c = cfg.command
    if c == "verify car":
        return [audits.car_audit(cfg.modes, cfg.trials, cfg.seed, norm_tol=cfg.tol_structural)], {}
    if c == "verify derivations":
        return [audits.lemma_audit(cfg.trials, cfg.seed, cfg.modes, derived_tol=cfg.tol_derived,
                                   structural_tol=cfg.tol_structural)], {}
    if c == "verify identity":
        return [audits.expansion_audit(cfg.trials, cfg.seed, cfg.modes, cfg.degree, cfg.tol_derived)], {}
    if c == "verify estimate":
        return [audits.estimate_audit(cfg.trials, cfg.seed, cfg.modes, cfg.degree, cfg.tol_derived)], {}
    if c == "bound":
        if cfg.trials > 1:
            return [audits.bound_audit(cfg.trials, cfg.seed, cfg.modes, cfg.samples, cfg.tol_derived)], {}
        audit = audits.bound_report(cfg.modes, cfg.samples, cfg.seed)
        return [audit], {"t_values": audit.metrics["report"]["t_values"]}
    if c == "fermi-bose":
        return [audits.fermi_bose_audit(cfg.trials, cfg.seed, cfg.modes)], {}
    if c == "intersect":
        return [audits.intersection_audit(load_golden()["intersection"]["dimension"], cfg.tol_derived)], {}
    if c == "ising":
        return _run_ising(cfg)
    if c == "energy":
        return _run_energy(cfg)
    raise ConfigError(f"unknown command {c!r}")


def run(cfg, stdout=None):
    """Execute a resolved configuration, write the report and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    results, tables = _run(cfg)
    report = reports.build_report(cfg.command, asdict(cfg), results)
    if cfg.output:
        reports.write_json(cfg.output, report)
    else:
        stdout.write(reports.dumps(report))
    if cfg.csv and tables:
        reports.write_csv_tables(cfg.csv, tables)
    if not report["converged"]:
        code = EXIT_UNCONVERGED
    else:
        code = EXIT_OK if report["passed"] else EXIT_VIOLATED
    print(_summary(cfg, code, results), file=sys.stderr)
    return code


def _summary(cfg, code, results):
    failed = [f"{a.name}:{n}" for a in results for n in a.failed()]
    status = {EXIT_OK: "PASS", EXIT_VIOLATED: "FAIL", EXIT_UNCONVERGED: "NOT CONVERGED"}[code]
    return f"{cfg.command}: {status}" + (f" ({', '.join(failed)})" if failed else "")


def main(argv=None):
    try:
        cfg = parse(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    try:
        code = run(cfg)
    except (DomainError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    return code


if __name__ == "__main__":
    sys.exit(main())
