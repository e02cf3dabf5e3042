"""Command-line front end.

Subcommands::

    solve     exact absorbing-chain solve for a topology file
    formula   closed-form value for one of the canonical graphs
    simulate  Monte Carlo estimate for a topology file
    sweep     grid of (beta_s, beta_h) values written as CSV

Exit codes: 0 ok, 2 input error, 3 capacity, 4 all trajectories censored,
5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import closedform
from .core import ModelParams, Topology, parse_topology
from .dynamics import (
    DEFAULT_MAX_EVENTS,
    AllCensoredError,
    SimulationConfig,
    estimate_retention,
)
from .exact import MAX_DENSE_N, CapacityError, SingularChainError, retention_time_exact

log = logging.getLogger("glauber_retention")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAPACITY = 3
EXIT_CENSORED = 4
EXIT_IO = 5

CANONICAL = ("single", "uncoupled3", "triangle", "linear3")
METHODS = ("closedform", "exact", "montecarlo")
CSV_HEADER = [
    "topology",
    "method",
    "beta_s",
    "beta_h",
    "tau_events",
    "tau_events_per_dipole",
    "std_error",
    "n_censored",
]


class InputError(ValueError):
    pass


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def read_topology(ref: str) -> Topology:
    """Load a topology from a path, or from the bundled file of a canonical name."""
    path = Path(ref)
    if path.is_file():
        text = path.read_text(encoding="utf-8")
    elif ref in CANONICAL:
        text = resources.files(__package__).joinpath("topologies", f"{ref}.topo").read_text(
            encoding="utf-8"
        )
    else:
        raise InputError(f"no such topology file or canonical name: {ref!r}")
    return parse_topology(text)


def _apply_overrides(args) -> Topology:
    topology = read_topology(args.topology)
    if args.h is not None:
        topology = topology.with_field(args.h)
    if args.s is not None:
        topology = topology.with_coupling(args.s)
    return topology.scaled(args.beta)


# --- sweep spec ------------------------------------------------------------

@dataclass
class SweepSpec:
    topologies: list[str] = field(default_factory=list)
    methods: list[str] = field(default_factory=list)
    h_values: list[float] = field(default_factory=list)
    s_grid: list[float] = field(default_factory=list)
    seed: int = 0
    samples: int = 10_000
    max_events: int = DEFAULT_MAX_EVENTS

    @property
    def mc_config(self) -> SimulationConfig:
        return SimulationConfig(seed=self.seed, n_samples=self.samples, max_events=self.max_events)


def parse_sweep_spec(text: str) -> SweepSpec:
    spec = SweepSpec()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *args = line.split()
        try:
            if key == "topology":
                if len(args) != 1:
                    raise InputError("expected 'topology <name-or-path>'")
                spec.topologies.append(args[0])
            elif key == "method":
                if not args:
                    raise InputError("expected 'method <name> ...'")
                for m in args:
                    if m not in METHODS:
                        raise InputError(f"unknown method {m!r}")
                    spec.methods.append(m)
            elif key == "beta_h":
                spec.h_values.extend(float(v) for v in args)
            elif key == "beta_s_list":
                spec.s_grid.extend(float(v) for v in args)
            elif key == "beta_s_log":
                if len(args) != 3:
                    raise InputError("expected 'beta_s_log <start> <stop> <points>'")
                start, stop, points = float(args[0]), float(args[1]), int(args[2])
                if start <= 0 or stop <= 0:
                    raise InputError("log-spaced range needs start > 0 and stop > 0")
                if points < 2:
                    raise InputError("log-spaced range needs at least 2 points")
                spec.s_grid.extend(np.geomspace(start, stop, points).tolist())
            elif key == "seed":
                spec.seed = int(args[0])
            elif key == "samples":
                spec.samples = int(args[0])
            elif key == "max_events":
                spec.max_events = int(args[0])
            else:
                raise InputError(f"unknown key {key!r}")
        except (ValueError, IndexError) as exc:
            raise InputError(f"line {lineno}: {exc or 'missing value'}") from None
    if not spec.topologies:
        raise InputError("sweep names no topology")
    if not spec.methods:
        raise InputError("sweep names no method")
    if not spec.s_grid or not spec.h_values:
        raise InputError("empty sweep")
    if spec.samples < 1 or spec.max_events < 1:
        raise InputError("samples and max_events must be positive")
    return spec


def _grid_topology(base: Topology, beta_s: float, beta_h: float) -> Topology:
    # file couplings act as relative weights scaled by beta_s; fields become beta_h
    return Topology(
        base.n,
        tuple((i, j, beta_s * s) for i, j, s in base.edges),
        (beta_h,) * base.n,
    )


def sweep_rows(spec: SweepSpec, workers: int = 1):
    """Yield CSV rows in grid order: topology, method, beta_h, beta_s."""
    bases = {ref: read_topology(ref) for ref in spec.topologies}
    for ref in spec.topologies:
        if "closedform" in spec.methods and ref not in CANONICAL:
            raise InputError(f"closedform needs a canonical topology, got {ref!r}")
        if "exact" in spec.methods and bases[ref].n > MAX_DENSE_N:
            raise CapacityError(f"{ref}: n={bases[ref].n} exceeds dense-solve cap {MAX_DENSE_N}")
    params = ModelParams(beta=1.0)
    for ref in spec.topologies:
        base = bases[ref]
        for method in spec.methods:
            for beta_h in spec.h_values:
                for beta_s in spec.s_grid:
                    row = {"topology": ref, "method": method, "beta_s": repr(beta_s),
                           "beta_h": repr(beta_h), "std_error": "", "n_censored": ""}
                    topo = _grid_topology(base, beta_s, beta_h)
                    if method == "closedform":
                        tau = closedform.FORMULAS[ref](beta_h, beta_s)
                    elif method == "exact":
                        tau = retention_time_exact(topo, params)
                    else:
                        try:
                            est = estimate_retention(topo, params, spec.mc_config, workers)
                            tau = est.mean_events
                            row["std_error"] = repr(est.std_error)
                            row["n_censored"] = str(est.n_censored)
                        except AllCensoredError as exc:
                            tau = None
                            row["n_censored"] = str(exc.n_censored)
                    if tau is None:
                        row["tau_events"] = row["tau_events_per_dipole"] = ""
                    else:
                        row["tau_events"] = repr(float(tau))
                        row["tau_events_per_dipole"] = repr(float(tau) / base.n)
                    log.info("%s %s beta_h=%s beta_s=%s tau=%s", ref, method,
                             row["beta_h"], row["beta_s"], row["tau_events"])
                    yield row


# --- commands --------------------------------------------------------------

def cmd_solve(args) -> int:
    topo = _apply_overrides(args)
    params = ModelParams(beta=1.0, lambda0=args.lambda0, tie_is_failure=args.tie_is_failure)
    tau = retention_time_exact(topo, params)
    print(f"events={_fmt(tau)}")
    print(f"events_per_dipole={_fmt(tau / topo.n)}")
    print(f"time={_fmt(tau / (topo.n * args.lambda0))}")
    return EXIT_OK


def cmd_formula(args) -> int:
    if args.name not in CANONICAL:
        raise InputError(f"unknown topology {args.name!r}; choose from {', '.join(CANONICAL)}")
    tau = closedform.FORMULAS[args.name](args.beta_h, args.beta_s)
    n = 1 if args.name == "single" else 3
    print(f"events={_fmt(tau)}")
    print(f"events_per_dipole={_fmt(tau / n)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    topo = _apply_overrides(args)
    params = ModelParams(beta=1.0, lambda0=args.lambda0, tie_is_failure=args.tie_is_failure)
    config = SimulationConfig(seed=args.seed, n_samples=args.samples, max_events=args.max_events)
    est = estimate_retention(topo, params, config, workers=args.workers)
    print(f"mean_events={_fmt(est.mean_events)}")
    print(f"std_error={_fmt(est.std_error)}")
    print(f"n_samples={est.n_samples}")
    print(f"n_censored={est.n_censored}")
    print(f"events_per_dipole={_fmt(est.mean_events / topo.n)}")
    print(f"mean_time={_fmt(est.mean_time)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        text = Path(args.spec).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read sweep spec: {exc}") from None
    spec = parse_sweep_spec(text)
    try:
        fh = open(args.output, "w", newline="", encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot write {args.output}: {exc}", file=sys.stderr)
        return EXIT_IO
    with fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        for row in sweep_rows(spec, workers=args.workers):
            writer.writerow(row)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="glauber-retention", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def model_opts(p):
        p.add_argument("topology", help="topology file or canonical name")
        p.add_argument("--beta", type=float, default=1.0,
                       help="inverse temperature applied to file couplings and fields")
        p.add_argument("--h", type=float, default=None, help="override with a uniform field")
        p.add_argument("--s", type=float, default=None, help="override every edge coupling")
        p.add_argument("--lambda0", type=float, default=1.0)
        tie = p.add_mutually_exclusive_group()
        tie.add_argument("--tie-is-failure", dest="tie_is_failure", action="store_true",
                         default=True, help="magnetization 0 counts as failure (default)")
        tie.add_argument("--tie-is-ok", dest="tie_is_failure", action="store_false")

    p = sub.add_parser("solve", help="exact hitting time from the all-up state")
    model_opts(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("formula", help="closed-form retention time")
    p.add_argument("name", help=" | ".join(CANONICAL))
    p.add_argument("--beta-h", type=float, default=0.0)
    p.add_argument("--beta-s", type=float, default=0.0)
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("simulate", help="Monte Carlo first-passage estimate")
    model_opts(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--max-events", type=int, default=DEFAULT_MAX_EVENTS)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="parameter grid to CSV")
    p.add_argument("spec", help="sweep spec file")
    p.add_argument("output", help="CSV output path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CapacityError as exc:
        code, message = EXIT_CAPACITY, str(exc)
    except AllCensoredError as exc:
        code, message = EXIT_CENSORED, str(exc)
    except (ValueError, SingularChainError) as exc:
        # InputError, TopologyError and parameter validation all land here
        code, message = EXIT_INPUT, str(exc)
    print(f"error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
