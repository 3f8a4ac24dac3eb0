"""Command-line front end: config parsing, experiment orchestration, reports.

Subcommands:

* ``bound``: closed-form bounds (chain pure/mixed, CHSH criterion,
  the identical-23|1-sources trilocal bound).
* ``optimize``: build a network from state descriptors and maximize an
  inequality family over the extreme measurement directions.
* ``scan``: grid scan of a one-parameter state family (CSV output).
* ``detect``: run the bipartite or tripartite detection protocol.
* ``certify``: sample classical source-independent models and check
  that no inequality of the family is violated.

Options come from a YAML config file (``--config``), overridden by
command-line flags. Every run is deterministic given config plus seed,
and reports embed the full effective configuration for replay. Exit
codes: 0 success, 2 configuration/usage error, 3 numerical-consistency
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import bounds, detect, lhv, states
from .inequalities import (
    VIOLATION_ATOL,
    linear_correlators,
    linear_value,
    nlocal_all,
    trilocal_all,
)
from .network import (
    build_linear,
    build_nonlinear,
    check_no_signaling,
    joint_distribution,
)
from .optimize import OptimizeConfig, grid_scan, maximize

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    """Bad configuration; the message names the offending field."""


def parse_state(descriptor: str):
    """Parse a state descriptor: family tag plus comma-separated parameters.

    Supported: ``schmidt:g0``, ``gghz:beta``, ``w:omega1,omega2``,
    ``bisep:CUT,c0,v0`` (cut 12|3, 13|2 or 23|1; / also accepted),
    ``product:a0,a1,b0,b1,c0,c1``, ``nghz:n``, ``werner:v`` and
    ``dm@FILE`` (JSON matrix, entries numbers or [re, im] pairs).
    """
    descriptor = descriptor.strip()
    if descriptor.startswith("dm@"):
        path = descriptor[3:]
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"state {descriptor!r}: cannot read {path}: {exc}")
        mat = np.array(
            [
                [complex(x[0], x[1]) if isinstance(x, list) else complex(x) for x in row]
                for row in raw
            ]
        )
        return mat
    if ":" not in descriptor:
        raise ConfigError(f"state {descriptor!r}: expected family:params")
    family, _, argstr = descriptor.partition(":")
    family = family.lower()
    try:
        if family == "bisep":
            parts = argstr.split(",")
            cut = parts[0].replace("/", "|")
            c0, v0 = float(parts[1]), float(parts[2])
            return states.biseparable(cut, c0, v0)
        args = [float(x) for x in argstr.split(",") if x != ""]
        if family == "schmidt":
            return states.pure_schmidt(args[0])
        if family == "gghz":
            return states.gghz(args[0])
        if family == "w":
            return states.w_state(args[0], args[1])
        if family == "product":
            if len(args) != 6:
                raise ConfigError(
                    f"state {descriptor!r}: product needs six amplitudes"
                )
            return states.product3([args[0:2], args[2:4], args[4:6]])
        if family == "nghz":
            return states.nghz(int(args[0]))
        if family == "werner":
            return states.werner(args[0])
    except ConfigError:
        raise
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"state {descriptor!r}: {exc}")
    raise ConfigError(f"state {descriptor!r}: unknown family {family!r}")


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}")
    except yaml.YAMLError as exc:
        raise ConfigError(f"config: invalid YAML in {path}: {exc}")
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a mapping")
    return data


def _merged(config: dict, args: argparse.Namespace, key: str, default=None):
    """Flag value if given, else config value, else default."""
    val = getattr(args, key.replace(".", "_"), None)
    if val is not None:
        return val
    node = config
    for part in key.split("."):
        if not isinstance(node, dict) or part not in node:
            return default
        node = node[part]
    return node


def _optimizer_config(config: dict, args: argparse.Namespace) -> OptimizeConfig:
    section = config.get("optimizer", {})
    if not isinstance(section, dict):
        raise ConfigError("optimizer: must be a mapping")
    kwargs = {}
    for field in ("restarts", "max_iters", "seed"):
        val = getattr(args, field, None)
        if val is None:
            val = section.get(field)
        if val is not None:
            kwargs[field] = int(val)
    tol = getattr(args, "tolerance", None)
    if tol is None:
        tol = section.get("tolerance")
    if tol is not None:
        kwargs["tolerance"] = float(tol)
    if "seed" not in kwargs:
        kwargs["seed"] = int(config.get("seed", 0))
    try:
        return OptimizeConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"optimizer: {exc}")
    except TypeError as exc:
        raise ConfigError(f"optimizer: {exc}")


def _build_network(config: dict, args: argparse.Namespace):
    topology = _merged(config, args, "network.topology")
    descriptors = _merged(config, args, "network.states")
    if topology is None:
        raise ConfigError("network.topology: required (linear or nonlinear)")
    if not descriptors:
        raise ConfigError("network.states: at least one state descriptor required")
    parsed = [
        parse_state(d) if isinstance(d, str) else np.asarray(d, dtype=complex)
        for d in descriptors
    ]
    if topology == "linear":
        try:
            return build_linear(parsed), "linear"
        except ValueError as exc:
            raise ConfigError(f"network.states: {exc}")
    if topology in ("nonlinear", "trilocal", "nlocal"):
        arrangement = _merged(config, args, "network.arrangement")
        if arrangement is None:
            arrangement = [1] * len(parsed)
        elif isinstance(arrangement, str):
            arrangement = [int(x) for x in arrangement.split(",")]
        order = _merged(config, args, "network.intermediate_order")
        try:
            net = build_nonlinear(parsed, arrangement, order)
        except ValueError as exc:
            raise ConfigError(f"network: {exc}")
        family = "trilocal" if net.n == 3 else "nlocal"
        return net, family
    raise ConfigError(f"network.topology: unknown topology {topology!r}")


def _out_dir(config: dict, args: argparse.Namespace) -> Path | None:
    out = _merged(config, args, "out")
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_report(out: Path | None, payload: dict) -> None:
    if out is not None:
        (out / "report.json").write_text(json.dumps(payload, indent=2) + "\n")


def _parse_float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x != ""]


def cmd_bound(config: dict, args: argparse.Namespace) -> int:
    family = _merged(config, args, "bound.family")
    if family is None:
        raise ConfigError("bound.family: required")
    echo: dict = {"family": family}
    if family == "linear-pure":
        gammas = _merged(config, args, "bound.gammas")
        if gammas is None:
            raise ConfigError("bound.gammas: required for linear-pure")
        if isinstance(gammas, str):
            gammas = _parse_float_list(gammas)
        value = bounds.bound_linear_pure(gammas)
        echo["gammas"] = list(gammas)
    elif family == "linear-mixed":
        lambdas = _merged(config, args, "bound.lambdas")
        if lambdas is None:
            raise ConfigError("bound.lambdas: required for linear-mixed")
        if isinstance(lambdas, str):
            lambdas = [_parse_float_list(t) for t in lambdas.split(";")]
        value = bounds.bound_linear_mixed(lambdas)
        echo["lambdas"] = [list(t) for t in lambdas]
    elif family == "horodecki":
        descriptor = _merged(config, args, "bound.state")
        if descriptor is None:
            raise ConfigError("bound.state: required for horodecki")
        rho = parse_state(descriptor)
        if rho.ndim == 1:
            rho = np.outer(rho, rho.conj())
        value = bounds.chsh_horodecki(rho)
        echo["state"] = descriptor
    elif family == "bisep231":
        c0 = _merged(config, args, "bound.c0")
        if c0 is None:
            raise ConfigError("bound.c0: required for bisep231")
        value = bounds.bound_bisep_231(float(c0))
        echo["c0"] = float(c0)
    else:
        raise ConfigError(f"bound.family: unknown family {family!r}")
    print(f"{value:.6f}")
    _write_report(_out_dir(config, args), {"command": "bound", "config": echo, "value": value})
    return EXIT_OK


def cmd_optimize(config: dict, args: argparse.Namespace) -> int:
    net, default_family = _build_network(config, args)
    family = _merged(config, args, "family", default_family)
    cfg = _optimizer_config(config, args)
    result = maximize(net, family, cfg)
    violated = result.best_value > 1.0 + VIOLATION_ATOL

    d = joint_distribution(net, result.best_settings)
    nosig = check_no_signaling(d)
    if family == "linear":
        report = {
            "correlators": dict(zip("IJ", linear_correlators(d))),
            "max_lhs": linear_value(*linear_correlators(d)),
        }
    elif family == "trilocal":
        report = trilocal_all(d).to_dict()
    else:
        report = nlocal_all(d, net.n).to_dict()

    print(f"best value: {result.best_value:.6f}")
    print(f"violated:   {violated}")
    for i, (d0, d1) in enumerate(result.best_settings):
        print(
            f"extreme {i + 1}: input0 (theta={d0.theta:.6f}, phi={d0.phi:.6f})  "
            f"input1 (theta={d1.theta:.6f}, phi={d1.phi:.6f})"
        )
    out = _out_dir(config, args)
    _write_report(
        out,
        {
            "command": "optimize",
            "config": {
                "family": family,
                "network": {
                    "topology": _merged(config, args, "network.topology"),
                    "states": _merged(config, args, "network.states"),
                    "arrangement": _merged(config, args, "network.arrangement"),
                },
                "optimizer": {
                    "restarts": cfg.restarts,
                    "max_iters": cfg.max_iters,
                    "tolerance": cfg.tolerance,
                    "seed": cfg.seed,
                },
            },
            "result": result.to_dict(),
            "violated": violated,
            "inequalities": report,
            "no_signaling_deviation": nosig.max_deviation,
        },
    )
    if out is not None:
        with open(out / "distribution.csv", "w", newline="") as fh:
            d.to_csv(fh)
    if not nosig.ok:
        print(
            f"no-signaling check failed: deviation {nosig.max_deviation}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    return EXIT_OK


_SCAN_FAMILIES = ("gghz", "bisep:12|3", "bisep:13|2", "bisep:23|1", "schmidt")


def cmd_scan(config: dict, args: argparse.Namespace) -> int:
    family = _merged(config, args, "scan.family")
    if family is None:
        raise ConfigError("scan.family: required")
    family = family.replace("/", "|")
    grid_text = _merged(config, args, "scan.grid")
    if grid_text is None:
        raise ConfigError("scan.grid: required (start:stop:step)")
    try:
        start, stop, step = (float(x) for x in str(grid_text).split(":"))
    except ValueError:
        raise ConfigError("scan.grid: expected start:stop:step")
    if step <= 0 or stop < start:
        raise ConfigError("scan.grid: need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    points = [round(start + i * step, 12) for i in range(count)]

    v0 = float(_merged(config, args, "scan.v0", 1.0))
    copies = int(_merged(config, args, "scan.copies", 3))
    arrangement = _merged(config, args, "network.arrangement")
    if isinstance(arrangement, str):
        arrangement = [int(x) for x in arrangement.split(",")]

    def builder(p: float):
        if family == "gghz":
            state = states.gghz(p)
        elif family.startswith("bisep:"):
            state = states.biseparable(family.split(":", 1)[1], p, v0)
        elif family == "schmidt":
            return build_linear([states.pure_schmidt(p)] * copies), "linear"
        else:
            raise ConfigError(
                f"scan.family: unknown family {family!r}; expected one of "
                f"{_SCAN_FAMILIES}"
            )
        arr = arrangement if arrangement is not None else [1] * 3
        return build_nonlinear([state] * 3, arr), "trilocal"

    # Validate the family tag before looping over the whole grid.
    builder(points[0])
    cfg = _optimizer_config(config, args)
    results = grid_scan(builder, points, cfg)

    out = _out_dir(config, args)
    rows = [
        (p, results[p], results[p] > 1.0 + VIOLATION_ATOL) for p in points
    ]
    for p, value, violated in rows:
        print(f"{p:.6f}  {value:.6f}  {'violated' if violated else ''}")
    if out is not None:
        with open(out / "scan.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["param", "max_lhs", "violated"])
            for p, value, violated in rows:
                writer.writerow([f"{p:.12g}", f"{value:.12g}", int(violated)])
        _write_report(
            out,
            {
                "command": "scan",
                "config": {"family": family, "grid": grid_text, "v0": v0},
                "points": [
                    {"param": p, "max_lhs": v, "violated": bool(f)}
                    for p, v, f in rows
                ],
            },
        )
    return EXIT_OK


def cmd_detect(config: dict, args: argparse.Namespace) -> int:
    protocol = _merged(config, args, "detect.protocol")
    if protocol is None:
        raise ConfigError("detect.protocol: required (bipartite or tripartite)")
    descriptors = _merged(config, args, "network.states")
    if not descriptors:
        raise ConfigError("network.states: state descriptors required")
    parsed = [parse_state(d) for d in descriptors]
    cfg = _optimizer_config(config, args)
    out = _out_dir(config, args)
    if protocol == "tripartite":
        if len(parsed) != 3:
            raise ConfigError("network.states: tripartite detection needs 3 states")
        threads = int(_merged(config, args, "threads", 1))
        verdict = detect.run_tripartite(*parsed, cfg=cfg, threads=threads)
        print(verdict.to_text())
        _write_report(
            out,
            {
                "command": "detect",
                "config": {"protocol": protocol, "states": descriptors},
                "verdict": verdict.to_dict(),
            },
        )
        return EXIT_OK
    if protocol == "bipartite":
        identical = bool(_merged(config, args, "detect.identical", False))
        verdict = detect.run_bipartite(parsed, cfg=cfg, identical_copies=identical)
        print(f"value: {verdict.value:.6f}")
        print(f"conclusion: {verdict.conclusion}")
        _write_report(
            out,
            {
                "command": "detect",
                "config": {
                    "protocol": protocol,
                    "states": descriptors,
                    "identical": identical,
                },
                "verdict": verdict.to_dict(),
            },
        )
        return EXIT_OK
    raise ConfigError(f"detect.protocol: unknown protocol {protocol!r}")


def cmd_certify(config: dict, args: argparse.Namespace) -> int:
    topology = _merged(config, args, "certify.topology")
    if topology is None:
        raise ConfigError("certify.topology: required")
    n = _merged(config, args, "certify.n")
    if n is None and topology == "trilocal":
        n = 3
    if n is None:
        raise ConfigError("certify.n: required")
    trials = int(_merged(config, args, "certify.trials", 1000))
    alphabet = int(_merged(config, args, "certify.alphabet", 4))
    seed = int(_merged(config, args, "seed", 0))
    try:
        report = lhv.certify(topology, int(n), trials, seed=seed, alphabet=alphabet)
    except ValueError as exc:
        raise ConfigError(f"certify: {exc}")
    print(
        f"topology {report.topology} n={report.n} alphabet={report.alphabet} "
        f"trials={report.trials}"
    )
    print(f"max lhs: {report.max_lhs:.9f}")
    print(f"failures: {len(report.failures)}")
    _write_report(
        _out_dir(config, args), {"command": "certify", "report": report.to_dict()}
    )
    return EXIT_OK if report.ok else EXIT_NUMERICAL


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="YAML config file")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--out", help="output directory for reports")
    parser.add_argument("--threads", type=int, help="worker threads where supported")


def _add_optimizer_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=int, help="optimizer restarts")
    parser.add_argument("--max-iters", dest="max_iters", type=int)
    parser.add_argument("--tolerance", type=float)


def _add_network_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--topology", dest="network_topology", choices=["linear", "nonlinear"]
    )
    parser.add_argument(
        "--states",
        dest="network_states",
        nargs="+",
        help="state descriptors, e.g. schmidt:0.9 gghz:0.72 'bisep:12|3,0.59,1'",
    )
    parser.add_argument(
        "--arrangement",
        dest="network_arrangement",
        help="comma-separated extreme-qubit indices, e.g. 1,1,1",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlocal",
        description="Quantum correlations in source-independent networks "
        "with fixed-input intermediate parties.",
    )
    sub = parser.add_subparsers(dest="command")

    p_bound = sub.add_parser("bound", help="closed-form violation bounds")
    _add_common(p_bound)
    p_bound.add_argument(
        "--family",
        dest="bound_family",
        choices=["linear-pure", "linear-mixed", "horodecki", "bisep231"],
    )
    p_bound.add_argument("--gammas", dest="bound_gammas")
    p_bound.add_argument(
        "--lambdas", dest="bound_lambdas", help="semicolon-separated triples"
    )
    p_bound.add_argument("--state", dest="bound_state")
    p_bound.add_argument("--c0", dest="bound_c0", type=float)
    p_bound.set_defaults(handler=cmd_bound)

    p_opt = sub.add_parser("optimize", help="maximize an inequality family")
    _add_common(p_opt)
    _add_network_flags(p_opt)
    _add_optimizer_flags(p_opt)
    p_opt.add_argument("--family", choices=["linear", "trilocal", "nlocal"])
    p_opt.set_defaults(handler=cmd_optimize)

    p_scan = sub.add_parser("scan", help="grid scan of a state family")
    _add_common(p_scan)
    _add_network_flags(p_scan)
    _add_optimizer_flags(p_scan)
    p_scan.add_argument("--family", dest="scan_family", help="gghz, bisep:CUT, schmidt")
    p_scan.add_argument("--grid", dest="scan_grid", help="start:stop:step")
    p_scan.add_argument("--v0", dest="scan_v0", type=float)
    p_scan.add_argument("--copies", dest="scan_copies", type=int)
    p_scan.set_defaults(handler=cmd_scan)

    p_det = sub.add_parser("detect", help="entanglement detection protocols")
    _add_common(p_det)
    _add_network_flags(p_det)
    _add_optimizer_flags(p_det)
    p_det.add_argument(
        "--protocol", dest="detect_protocol", choices=["bipartite", "tripartite"]
    )
    p_det.add_argument(
        "--identical",
        dest="detect_identical",
        action="store_const",
        const=True,
        help="declare the sources identical copies",
    )
    p_det.set_defaults(handler=cmd_detect)

    p_cert = sub.add_parser("certify", help="classical-model certification sweep")
    _add_common(p_cert)
    p_cert.add_argument(
        "--topology",
        dest="certify_topology",
        choices=["linear", "trilocal", "nonlinear"],
    )
    p_cert.add_argument("--n", dest="certify_n", type=int)
    p_cert.add_argument("--trials", dest="certify_trials", type=int)
    p_cert.add_argument("--alphabet", dest="certify_alphabet", type=int)
    p_cert.set_defaults(handler=cmd_certify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "handler", None):
        parser.print_help()
        return EXIT_CONFIG
    try:
        config = _load_config(args.config)
        return args.handler(config, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
