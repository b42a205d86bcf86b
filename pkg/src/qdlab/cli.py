"""Command line front end.

Subcommands: sjcm-evolve, sjcm-sweep, dephasing-evolve, dephasing-amplitude,
pump-evolve, check.  Every flag can also be supplied through a flat JSON
config (--config file.json); explicit flags win.  Output is CSV with a
header row, the time column first and 17 significant digits per value, so
identical fixed-step runs produce identical bytes.

Exit codes: 0 success, 1 usage error, 2 numerical failure (health check,
truncation leak or step underflow).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import checks, lindblad, sjcm
from .integrate import RK4_FIXED, RK45_ADAPTIVE, IntegratorConfig, TimeSeries
from .lindblad import CONFIGURATION, SINGLE_PARTICLE, DephasingParams
from .sjcm import EXACT, HARTREE_FOCK, QdInitSpec, SjcmParams

__all__ = ["main", "format_csv", "write_csv", "read_csv"]


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def format_csv(series: TimeSeries) -> str:
    """CSV text: t first, complex columns split into _re/_im pairs."""
    names = []
    cols = []
    for name, values in series.columns.items():
        if np.iscomplexobj(values):
            names += [f"{name}_re", f"{name}_im"]
            cols += [values.real, values.imag]
        else:
            names.append(name)
            cols.append(values)
    lines = [",".join(["t"] + names)]
    for k in range(len(series)):
        lines.append(",".join([_fmt(series.times[k])] + [_fmt(c[k]) for c in cols]))
    return "\n".join(lines) + "\n"


def write_csv(series: TimeSeries, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(format_csv(series))


def read_csv(path: str) -> TimeSeries:
    """Inverse of write_csv; rejoins _re/_im pairs into complex columns."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    if not header or header[0] != "t":
        raise ValueError(f"{path}: expected a 't' column first, got {header[:1]}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: {data.shape[1]} data columns for {len(header)} header fields")
    raw = dict(zip(header, data.T))
    times = raw.pop("t")
    cols: dict[str, np.ndarray] = {}
    names = list(raw)
    k = 0
    while k < len(names):
        name = names[k]
        base = name[:-3]
        if name.endswith("_re") and k + 1 < len(names) and names[k + 1] == f"{base}_im":
            cols[base] = raw[name] + 1j * raw[names[k + 1]]
            k += 2
        else:
            cols[name] = raw[name]
            k += 1
    return TimeSeries(times, cols)


def _write_table(path: str, header: list[str], rows) -> int:
    lines = [",".join(header)]
    count = 0
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
        count += 1
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return count


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems through our exit-code scheme."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qdlab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")

    def add_common(p, default_out):
        p.add_argument("--config", help="flat JSON file with defaults for any flag")
        p.add_argument("--out", default=None, help=f"output CSV path (default {default_out})")
        p.add_argument("--g", type=float, default=None, help="light-matter coupling (default 0.5, so 2g = 1)")
        p.add_argument("--method", choices=["rk4", "rk45"], default=None,
                       help="integrator (default rk45)")
        p.add_argument("--dt", type=float, default=None, help="fixed step (default period/1000)")
        p.add_argument("--rtol", type=float, default=None, help="adaptive relative tolerance (default 1e-9)")
        p.add_argument("--atol", type=float, default=None, help="adaptive absolute tolerance (default 1e-12)")
        p.add_argument("--periods", type=float, default=None, help="span in Rabi periods (default 20)")
        p.add_argument("--samples-per-period", type=int, default=None, help="output samples per period (default 200)")

    p = sub.add_parser("sjcm-evolve", help="photon-resolved dot-cavity dynamics, hierarchy and reference engines")
    add_common(p, "sjcm.csv")
    p.add_argument("--fe", type=float, default=None, help="initial electron occupation")
    p.add_argument("--fh", type=float, default=None, help="initial hole occupation")
    p.add_argument("--delta", type=float, default=None, help="initial pair correlation (default 0)")
    p.add_argument("--O", type=float, default=None, dest="o_sum",
                   help="oscillation ability c_G + c_Xs (alternative to --fe/--fh)")
    p.add_argument("--C", type=float, default=None, dest="charge", help="charge f_h - f_e, with --O")
    p.add_argument("--I", type=float, default=None, dest="imbalance", help="inversion c_Xs - c_G, with --O (default 0)")
    for n in range(4):
        p.add_argument(f"--p{n}", type=float, default=None, help=f"initial probability of {n} photons")
    p.add_argument("--photon-dist", default=None, help="comma-separated photon distribution (overrides --pN)")
    p.add_argument("--mode", choices=["exact", "hf", "density", "both"], default=None,
                   help="engine; 'both' writes exact and hf CSVs (default both)")
    p.add_argument("--n-max", type=int, default=None, help="photon cutoff (default: initial support + 1)")

    p = sub.add_parser("sjcm-sweep", help="max g2 over a grid of initial conditions")
    add_common(p, "sweep.csv")
    p.add_argument("--grid", choices=["delta0", "triangle", "fixed-o"], default=None,
                   help="initial-condition family (default delta0)")
    p.add_argument("--o-value", type=float, default=None, help="O for --grid fixed-o")
    p.add_argument("--d-c", type=float, default=None, help="charge step (default 0.02)")
    p.add_argument("--d-o", type=float, default=None, help="oscillation-ability step (default 0.02)")
    p.add_argument("--mode", choices=["exact", "hf"], default=None, help="hierarchy flavor (default exact)")

    p = sub.add_parser("dephasing-evolve", help="two-shell dot with p-shell loss and pure dephasing")
    add_common(p, "dephasing.csv")
    p.add_argument("--variant", choices=["config", "sp", "both"], default=None,
                   help="p-loss construction (default both)")
    p.add_argument("--gamma", type=float, default=None, help="p-shell loss rate (default 0.3)")
    p.add_argument("--beta", type=float, default=None, help="s-shell loss rate (default 0.25)")
    p.add_argument("--engine", choices=["full", "reduced"], default=None,
                   help="density matrix or closed 8-component system (default full)")
    p.add_argument("--n-max", type=int, default=None, help="photon cutoff (default 2)")

    p = sub.add_parser("dephasing-amplitude", help="late-time amplitude vs loss rate against the closed form")
    add_common(p, "amplitude.csv")
    p.add_argument("--gamma-tilde-grid", default=None,
                   help="rate grid start:stop:scale:count, scale lin|log (default 0.05:5:log:40)")
    p.add_argument("--variant", choices=["config", "sp"], default=None, help="p-loss construction (default config)")
    p.add_argument("--engine", choices=["eig", "ode"], default=None,
                   help="exact eigenpropagation or time stepping (default eig)")

    p = sub.add_parser("pump-evolve", help="pumped p shell: stationarity vs persistent Rabi swing")
    add_common(p, "pump.csv")
    p.add_argument("--variant", choices=["config", "sp", "both"], default=None, help="default both")
    p.add_argument("--gamma", type=float, default=None, help="p-shell loss rate (default 0.3)")
    p.add_argument("--pump", type=float, default=None, help="p-shell pump rate (default equal to --gamma)")
    p.add_argument("--t-min", type=float, default=None, help="measurement window start (default 10/gamma + 50 periods)")
    p.add_argument("--n-max", type=int, default=None, help="photon cutoff (default 2)")

    p = sub.add_parser("check", help="run the cross-engine acceptance suite")
    p.add_argument("--config", help=argparse.SUPPRESS)

    return parser


def _apply_config(args: argparse.Namespace) -> None:
    if not getattr(args, "config", None):
        return
    with open(args.config) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError(f"{args.config}: config must be a flat JSON object")
    known = vars(args)
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "command"):
            raise UsageError(f"{args.config}: unknown config key {key!r}")
        if known[dest] is None:
            setattr(args, dest, value)


def _pick(value, default):
    return default if value is None else value


def _integrator(args, g: float, default_periods: float = 20.0) -> IntegratorConfig:
    method = {None: RK45_ADAPTIVE, "rk45": RK45_ADAPTIVE, "rk4": RK4_FIXED}[args.method]
    period = math.pi / g
    kwargs = {}
    if args.dt is not None:
        kwargs["dt"] = args.dt
    if args.rtol is not None:
        kwargs["rtol"] = args.rtol
    if args.atol is not None:
        kwargs["atol"] = args.atol
    return IntegratorConfig.rabi(
        g,
        periods=_pick(args.periods, default_periods),
        samples_per_period=_pick(args.samples_per_period, 200),
        method=method,
        **kwargs,
    )


def _suffixed(path: str, suffix: str) -> str:
    if path.endswith(".csv"):
        return f"{path[:-4]}_{suffix}.csv"
    return f"{path}_{suffix}"


def _photon_dist(args) -> tuple[float, ...]:
    if args.photon_dist is not None:
        try:
            dist = tuple(float(x) for x in str(args.photon_dist).split(","))
        except ValueError:
            raise UsageError(f"--photon-dist must be comma-separated numbers, got {args.photon_dist!r}")
        return dist
    dist = tuple(_pick(getattr(args, f"p{n}"), 0.0) for n in range(4))
    if sum(dist) == 0.0:
        raise UsageError("no photon distribution given (use --pN or --photon-dist)")
    return dist


def _init_spec(args) -> QdInitSpec:
    dist = _photon_dist(args)
    occupations = args.fe is not None or args.fh is not None
    oci = args.o_sum is not None
    if occupations and oci:
        raise UsageError("give either --fe/--fh/--delta or --O/--C/--I, not both")
    try:
        if occupations:
            if args.fe is None or args.fh is None:
                raise UsageError("--fe and --fh must be given together")
            return QdInitSpec.from_occupations(args.fe, args.fh, _pick(args.delta, 0.0), dist)
        if oci:
            return QdInitSpec.from_oci(args.o_sum, _pick(args.charge, 0.0),
                                       _pick(args.imbalance, 0.0), dist)
    except ValueError as exc:
        raise UsageError(str(exc))
    raise UsageError("initial dot state missing (use --fe/--fh or --O)")


def _cmd_sjcm_evolve(args) -> int:
    g = _pick(args.g, 0.5)
    spec = _init_spec(args)
    params = SjcmParams(g=g, n_max=args.n_max)
    cfg = _integrator(args, g)
    mode = _pick(args.mode, "both")
    out = _pick(args.out, "sjcm.csv")
    engines = {
        "exact": lambda: sjcm.evolve_hierarchy(spec, params, cfg, EXACT),
        "hf": lambda: sjcm.evolve_hierarchy(spec, params, cfg, HARTREE_FOCK),
        "density": lambda: sjcm.oracle_evolve(spec, params, cfg),
    }
    targets = [("exact", _suffixed(out, "exact")), ("hf", _suffixed(out, "hf"))] \
        if mode == "both" else [(mode, out)]
    for name, path in targets:
        series = engines[name]()
        write_csv(series, path)
        print(f"{name}: {len(series)} samples -> {path}")
    return 0


def _sweep_grid(args) -> list[QdInitSpec]:
    kind = _pick(args.grid, "delta0")
    d_c = _pick(args.d_c, 0.02)
    if kind == "delta0":
        return sjcm.grid_delta0_path(d_c)
    if kind == "triangle":
        return sjcm.grid_co_triangle(_pick(args.d_o, 0.02), d_c)
    if args.o_value is None:
        raise UsageError("--grid fixed-o needs --o-value")
    return sjcm.grid_fixed_o(args.o_value, d_c)


def _cmd_sjcm_sweep(args) -> int:
    g = _pick(args.g, 0.5)
    grid = _sweep_grid(args)
    params = SjcmParams(g=g)
    cfg = _integrator(args, g)
    mode = {None: EXACT, "exact": EXACT, "hf": HARTREE_FOCK}[args.mode]
    points = sjcm.sweep_g2max(grid, params, cfg, mode=mode)
    out = _pick(args.out, "sweep.csv")
    count = _write_table(out, ["O", "C", "I", "delta", "g2_max"],
                         ((p.O, p.C, p.I, p.delta, p.g2_max) for p in points))
    print(f"{count} grid points -> {out}")
    return 0


_VARIANTS = {"config": CONFIGURATION, "sp": SINGLE_PARTICLE}


def _cmd_dephasing_evolve(args) -> int:
    g = _pick(args.g, 0.5)
    cfg = _integrator(args, g)
    engine = _pick(args.engine, "full")
    out = _pick(args.out, "dephasing.csv")
    choice = _pick(args.variant, "both")
    variants = list(_VARIANTS) if choice == "both" else [choice]
    for short in variants:
        params = DephasingParams(
            g=g, Gamma=_pick(args.gamma, 0.3), beta=_pick(args.beta, 0.25),
            variant=_VARIANTS[short], n_max=_pick(args.n_max, 2),
        )
        series = lindblad.evolve_dephasing(params, cfg) if engine == "full" \
            else lindblad.evolve_m(params, cfg)
        path = _suffixed(out, short) if choice == "both" else out
        write_csv(series, path)
        print(f"{params.variant}: {len(series)} samples -> {path}")
    return 0


def _parse_grid(text: str) -> np.ndarray:
    parts = str(text).split(":")
    if len(parts) != 4 or parts[2] not in ("lin", "log"):
        raise UsageError(f"grid must be start:stop:scale:count with scale lin|log, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[3])
    except ValueError:
        raise UsageError(f"bad grid numbers in {text!r}")
    if count < 2 or start <= 0 or stop <= start:
        raise UsageError(f"grid needs 0 < start < stop and count >= 2, got {text!r}")
    return np.geomspace(start, stop, count) if parts[2] == "log" else np.linspace(start, stop, count)


def _cmd_dephasing_amplitude(args) -> int:
    g = _pick(args.g, 0.5)
    period = math.pi / g
    grid = _parse_grid(_pick(args.gamma_tilde_grid, "0.05:5:log:40"))
    variant = _VARIANTS[_pick(args.variant, "config")]
    engine = _pick(args.engine, "eig")
    rows = []
    for gt in grid:
        gamma = gt * 2 * g
        t_min = 10.0 / gamma + 50.0 * period
        params = DephasingParams(g=g, Gamma=gamma, beta=0.0, variant=variant)
        if engine == "eig":
            times = np.arange(0.0, t_min + 3.0 * period + period / 400.0, period / 200.0)
            series = lindblad.analytic_beta0(params, times)
        else:
            cfg = IntegratorConfig(t_span=(0.0, t_min + 3.0 * period), sample_every=period / 200.0)
            series = lindblad.evolve_m(params, cfg)
        measured = lindblad.measure_amplitude(series, "Xs0", t_min, period)
        rows.append((gt, measured, lindblad.asymptotic_amplitude(gt)))
    out = _pick(args.out, "amplitude.csv")
    count = _write_table(out, ["gamma_tilde", "amplitude", "formula"], rows)
    print(f"{count} rates -> {out}")
    return 0


def _cmd_pump_evolve(args) -> int:
    g = _pick(args.g, 0.5)
    gamma = _pick(args.gamma, 0.3)
    pump = _pick(args.pump, gamma)
    out = _pick(args.out, "pump.csv")
    choice = _pick(args.variant, "both")
    variants = list(_VARIANTS) if choice == "both" else [choice]
    for short in variants:
        params = DephasingParams(g=g, Gamma=gamma, beta=0.0, P=pump,
                                 variant=_VARIANTS[short], n_max=_pick(args.n_max, 2))
        series, amplitude = lindblad.pumped_scenario(params, t_min=args.t_min)
        path = _suffixed(out, short) if choice == "both" else out
        write_csv(series, path)
        print(f"{params.variant}: late n_e_s amplitude {amplitude:.6f}, "
              f"{len(series)} samples -> {path}")
    return 0


def _cmd_check(args) -> int:
    results = checks.run_all()
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.index:2d} {r.name:<{width}}  {r.detail}")
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 2 if failed else 0


_COMMANDS = {
    "sjcm-evolve": _cmd_sjcm_evolve,
    "sjcm-sweep": _cmd_sjcm_sweep,
    "dephasing-evolve": _cmd_dephasing_evolve,
    "dephasing-amplitude": _cmd_dephasing_amplitude,
    "pump-evolve": _cmd_pump_evolve,
    "check": _cmd_check,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required (see --help)")
        _apply_config(args)
        return _COMMANDS[args.command](args)
    except (UsageError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        # HealthError and IntegrationError both land here.
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
