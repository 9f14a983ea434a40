"""Command-line front end: simulation runs, law comparison, excitation
analysis, CSV emission and figure rendering.

Configuration comes from a JSON document (see DEFAULTS for the schema) with
command-line flags overriding individual keys.  Unknown keys are rejected.

Exit codes: 0 success, 2 configuration error, 3 invariant breach during
integration, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from .analysis import RateGains, build_bound_report, theta_tilde_bound
from .errors import CertificateError, ConfigError, IntegrationError
from .error_models import (
    F16_THETA_STAR,
    ErrorModelScenario,
    UncertaintyProfile,
    constant_uncertainty,
    make_command,
    make_f16_scenario,
    make_scenario,
    sinusoid_uncertainty,
)
from .estimator import EstimatorLaw
from .excitation import (
    ExcitationConfig,
    RegressorTrace,
    detect_fe,
    detect_pe,
    propagation_timeline,
)
from .numerics import matrix_norm2
from .projection import ConvexBound, ProjFamily
from .simulate import SimConfig, Trajectory, run

# Tool defaults.  The f16-paper scenario fixes lambda_gamma, kappa,
# lambda_omega and gamma0; every other number below is a free parameter of
# the method that the scenario leaves open, chosen here so that
# kappa > 1 / gamma_max holds with the scenario gains unchanged.
DEFAULTS: dict = {
    "scenario": {"name": "f16-paper"},
    "law": {
        "variant": "tv_projected",
        "lambda_gamma": 0.5,
        "kappa": 0.5,
        "lambda_omega": 10.0,
        "gamma0": 10.0,
        "theta_cap": 1.0,
        "theta_margin": 0.1,
        "gamma_cap": 100.0,
        "gamma_margin": 10.0,
    },
    "command": {"kind": "step_train", "period": 10.0, "amplitude": 5.0, "value": 1.0},
    "uncertainty": {"kind": "constant", "amplitude": 0.1, "frequency": 0.2},
    "excitation": {"k_omega": 2.0, "rho_omega": 0.5, "rho_gamma": 0.9},
    "sim": {"dt": 1e-3, "t_end": 60.0, "record_stride": 10, "integrator": "rk4"},
    "output": {"dir": "out", "prefix": "run", "plots": True},
}

_SCENARIO_KEYS = {"name", "A", "B", "Bz", "K", "Q", "theta_star", "x0", "x_hat0"}
_VARIANT_ALIASES = {
    "static": "static",
    "tv": "tv_projected",
    "tv_projected": "tv_projected",
    "forgetting": "tv_forgetting",
    "tv_forgetting": "tv_forgetting",
}


def parse_config(data: dict) -> dict:
    """Validate a raw config mapping and merge it over the defaults."""
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    cfg = copy.deepcopy(DEFAULTS)
    for section, content in data.items():
        if section not in cfg:
            raise ConfigError(f"unknown config section {section!r}")
        if not isinstance(content, dict):
            raise ConfigError(f"section {section!r} must be an object")
        allowed = _SCENARIO_KEYS if section == "scenario" else set(cfg[section])
        for key, value in content.items():
            if key not in allowed:
                raise ConfigError(f"unknown key {section}.{key}")
            cfg[section][key] = value
    variant = cfg["law"]["variant"]
    if variant not in _VARIANT_ALIASES:
        raise ConfigError(
            f"law.variant must be one of {sorted(set(_VARIANT_ALIASES))}, got {variant!r}"
        )
    cfg["law"]["variant"] = _VARIANT_ALIASES[variant]
    scenario = cfg["scenario"]
    inline = [k for k in ("A", "B", "Bz", "K") if k in scenario]
    if inline and len(inline) != 4:
        raise ConfigError("inline scenarios need all of A, B, Bz, K")
    if inline and "theta_star" not in scenario:
        raise ConfigError("inline scenarios need theta_star")
    if not inline and scenario.get("name") != "f16-paper":
        raise ConfigError(f"unknown scenario name {scenario.get('name')!r}")
    return cfg


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data)


def serialize_config(cfg: dict) -> str:
    return json.dumps(cfg, indent=2, sort_keys=True)


def build_uncertainty(cfg: dict, base) -> UncertaintyProfile:
    unc = cfg["uncertainty"]
    if unc["kind"] == "constant":
        return constant_uncertainty(base)
    if unc["kind"] == "sinusoid":
        return sinusoid_uncertainty(base, float(unc["amplitude"]), float(unc["frequency"]))
    raise ConfigError(f"unknown uncertainty kind {unc['kind']!r}")


def build_scenario(cfg: dict) -> tuple[ErrorModelScenario, np.ndarray | None, np.ndarray | None]:
    sc = cfg["scenario"]
    cmd_cfg = cfg["command"]
    if cmd_cfg["kind"] not in ("step_train", "constant", "zero"):
        raise ConfigError(f"unknown command kind {cmd_cfg['kind']!r}")
    command = make_command(
        cmd_cfg["kind"],
        period=float(cmd_cfg["period"]),
        amplitude=float(cmd_cfg["amplitude"]),
        value=float(cmd_cfg["value"]),
    )
    if "A" in sc:
        base = np.atleast_2d(np.asarray(sc["theta_star"], dtype=float))
        if base.shape[0] == 1 and base.shape[1] > 1:
            base = base.T
        uncertainty = build_uncertainty(cfg, base)
        b = np.asarray(sc["B"], dtype=float)
        if b.ndim == 1:
            b = b.reshape(-1, 1)
        k = np.asarray(sc["K"], dtype=float)
        if k.ndim == 1:
            k = k.reshape(-1, 1)
        scenario = make_scenario(
            sc["A"], b, sc["Bz"], k, uncertainty, command, q=sc.get("Q")
        )
    else:
        uncertainty = build_uncertainty(cfg, F16_THETA_STAR)
        scenario = make_f16_scenario(uncertainty=uncertainty, command=command)
    x0 = np.asarray(sc["x0"], dtype=float) if "x0" in sc else None
    x_hat0 = np.asarray(sc["x_hat0"], dtype=float) if "x_hat0" in sc else None
    return scenario, x0, x_hat0


def build_law(cfg: dict, scenario: ErrorModelScenario, variant: str | None = None) -> EstimatorLaw:
    law_cfg = cfg["law"]
    requested = variant or law_cfg["variant"]
    if requested not in _VARIANT_ALIASES:
        raise ConfigError(f"unknown law variant {requested!r}")
    variant = _VARIANT_ALIASES[requested]
    nn, m = scenario.reg_dim, scenario.m
    theta0 = np.zeros((nn, m))
    g0 = law_cfg["gamma0"]
    gamma0 = float(g0) * np.eye(nn) if np.isscalar(g0) else np.asarray(g0, dtype=float)
    if variant == "static":
        return EstimatorLaw.static(theta0, gamma0)
    family = ProjFamily.uniform(m, float(law_cfg["theta_cap"]), float(law_cfg["theta_margin"]))
    if scenario.uncertainty.theta_star_max > float(law_cfg["theta_cap"]) + 1e-12:
        raise ConfigError(
            f"theta_cap {law_cfg['theta_cap']} is below the uncertainty bound "
            f"{scenario.uncertainty.theta_star_max:.6g}; the true parameter must "
            "lie inside the projection set"
        )
    bound = ConvexBound(float(law_cfg["gamma_cap"]), float(law_cfg["gamma_margin"]), "fro")
    try:
        if variant == "tv_projected":
            return EstimatorLaw.tv_projected(
                theta0, family, gamma0, bound,
                float(law_cfg["lambda_gamma"]), float(law_cfg["kappa"]),
                float(law_cfg["lambda_omega"]),
            )
        return EstimatorLaw.tv_forgetting(
            theta0, family, gamma0, bound,
            float(law_cfg["lambda_gamma"]), float(law_cfg["kappa"]),
            float(law_cfg["lambda_omega"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_sim(cfg: dict) -> SimConfig:
    sim = cfg["sim"]
    try:
        return SimConfig(
            dt=float(sim["dt"]),
            t_end=float(sim["t_end"]),
            record_stride=int(sim["record_stride"]),
            integrator=str(sim["integrator"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_excitation_config(cfg: dict) -> ExcitationConfig:
    law_cfg = cfg["law"]
    exc_cfg = cfg["excitation"]
    try:
        return ExcitationConfig(
            kappa=float(law_cfg["kappa"]),
            gamma_max=float(law_cfg["gamma_cap"]) + float(law_cfg["gamma_margin"]),
            k_omega=float(exc_cfg["k_omega"]),
            rho_omega=float(exc_cfg["rho_omega"]),
            lambda_omega=float(law_cfg["lambda_omega"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    return repr(float(x))


def _write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _tri_names(tag: str, n: int) -> list[str]:
    iu, ju = np.triu_indices(n)
    return [f"{tag}_{i + 1}_{j + 1}" for i, j in zip(iu, ju)]


def trajectory_header(dims: tuple[int, int, int]) -> list[str]:
    n, nn, m = dims
    cols = ["t"]
    cols += [f"x{i + 1}" for i in range(n)]
    cols += [f"xhat{i + 1}" for i in range(n)]
    cols += [f"e{i + 1}" for i in range(n)]
    cols += ["u"] if m == 1 else [f"u{j + 1}" for j in range(m)]
    cols += [f"theta_{i + 1}_{j + 1}" for j in range(m) for i in range(nn)]
    cols += _tri_names("gamma", nn)
    cols += _tri_names("omega", nn)
    cols += ["rho", "V", "norm_e", "norm_theta_tilde"]
    return cols


def write_trajectory_csv(traj: Trajectory, path) -> Path:
    path = Path(path)
    n, nn, m = traj.dims

    def rows():
        for k in range(len(traj)):
            row = [traj.t[k]]
            row += list(traj.x[k])
            row += list(traj.x_hat[k])
            row += list(traj.e[k])
            row += list(traj.u[k])
            row += list(traj.theta[k].ravel(order="F"))
            row += list(traj.gamma_tri[k])
            row += list(traj.omega_tri[k])
            row += [traj.rho[k], traj.V[k], traj.norm_e[k], traj.norm_theta_tilde[k]]
            yield row

    _write_csv(path, trajectory_header(traj.dims), rows())
    return path


BOUND_HEADER = [
    "t", "eta", "upsilon", "eta0", "upsilon_max", "in_D", "in_Dmax",
    "envelope", "envelope_ok", "vdot_term_Q", "vdot_term_thetadot",
    "vdot_term_excitation",
]


def write_bound_csv(report, path) -> Path:
    path = Path(path)

    def rows():
        for k in range(len(report.t)):
            yield [
                report.t[k], report.eta[k], report.upsilon[k],
                report.eta0, report.upsilon_max,
                bool(report.in_d[k]), bool(report.in_dmax[k]),
                report.envelope[k], bool(report.envelope_ok[k]),
                report.vdot_term_q[k], report.vdot_term_thetadot[k],
                report.vdot_term_excitation[k],
            ]

    _write_csv(path, BOUND_HEADER, rows())
    return path


def write_compare_csv(labeled, path) -> Path:
    path = Path(path)
    header = ["t"]
    for label, _ in labeled:
        header += [f"V_{label}", f"norm_e_{label}", f"norm_theta_tilde_{label}"]
    base = labeled[0][1]

    def rows():
        for k in range(len(base)):
            row = [base.t[k]]
            for _, traj in labeled:
                row += [traj.V[k], traj.norm_e[k], traj.norm_theta_tilde[k]]
            yield row

    _write_csv(path, header, rows())
    return path


EXCITATION_HEADER = [
    "kind", "t1", "t2", "T", "alpha", "d", "alpha0", "meets_minimum",
    "omega_fe", "t3", "gamma_fe", "t4", "alpha0_prime",
]


def write_excitation_csv(report, timeline, path) -> Path:
    path = Path(path)
    nan = float("nan")
    row = [
        report.t1, report.t2, report.T, report.alpha, report.d, report.alpha0,
        report.meets_minimum,
    ]
    if timeline is not None:
        row += [
            timeline.omega_fe, timeline.t3,
            nan if timeline.gamma_fe is None else timeline.gamma_fe,
            nan if timeline.t4 is None else timeline.t4,
            nan if timeline.alpha0_prime is None else timeline.alpha0_prime,
        ]
    else:
        row += [nan, nan, nan, nan, nan]
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(EXCITATION_HEADER) + "\n")
        fh.write(report.kind + "," + ",".join(_fmt(v) for v in row) + "\n")
    return path


def read_regressor_csv(path) -> RegressorTrace:
    """Load a sampled regressor: a header row, a leading time column and one
    column per regressor component."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            data = np.loadtxt(fh, delimiter=",", ndmin=2)
    except OSError:
        raise
    except ValueError as exc:
        raise ConfigError(f"malformed trace CSV {path}: {exc}") from exc
    if len(header) < 2:
        raise ConfigError(f"trace CSV {path} needs a time column and regressor columns")
    if data.shape[1] != len(header):
        raise ConfigError(f"trace CSV {path}: row width does not match header")
    try:
        return RegressorTrace.create(data[:, 0], data[:, 1:])
    except ValueError as exc:
        raise ConfigError(f"trace CSV {path}: {exc}") from exc


def _resolve(args) -> dict:
    cfg = load_config(args.config) if args.config else parse_config({})
    for section, key, attr, cast in _FLAG_MAP:
        value = getattr(args, attr, None)
        if value is not None:
            cfg[section][key] = cast(value)
    if getattr(args, "scenario", None):
        if args.scenario != "f16-paper":
            raise ConfigError(f"unknown scenario name {args.scenario!r}")
        cfg["scenario"] = {"name": args.scenario}
    if getattr(args, "out", None):
        cfg["output"]["dir"] = args.out
    if getattr(args, "prefix", None):
        cfg["output"]["prefix"] = args.prefix
    if getattr(args, "no_plots", False):
        cfg["output"]["plots"] = False
    return cfg


_FLAG_MAP = [
    ("law", "variant", "law", str),
    ("law", "lambda_gamma", "lambda_gamma", float),
    ("law", "kappa", "kappa", float),
    ("law", "lambda_omega", "lambda_omega", float),
    ("law", "gamma0", "gamma0", float),
    ("law", "theta_cap", "theta_cap", float),
    ("law", "theta_margin", "theta_margin", float),
    ("law", "gamma_cap", "gamma_cap", float),
    ("law", "gamma_margin", "gamma_margin", float),
    ("command", "kind", "command", str),
    ("command", "period", "period", float),
    ("command", "amplitude", "amplitude", float),
    ("command", "value", "value", float),
    ("uncertainty", "kind", "uncertainty", str),
    ("uncertainty", "amplitude", "sin_amplitude", float),
    ("uncertainty", "frequency", "sin_frequency", float),
    ("excitation", "k_omega", "k_omega", float),
    ("excitation", "rho_omega", "rho_omega", float),
    ("excitation", "rho_gamma", "rho_gamma", float),
    ("sim", "dt", "dt", float),
    ("sim", "t_end", "t_end", float),
    ("sim", "record_stride", "record_stride", int),
    ("sim", "integrator", "integrator", str),
]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its keys")
    p.add_argument("--scenario", help="built-in scenario name (f16-paper)")
    p.add_argument("--law", help="law variant: static, tv_projected (tv), tv_forgetting (forgetting)")
    p.add_argument("--lambda-gamma", dest="lambda_gamma", type=float,
                   help="learning-rate gain (f16-paper value 0.5)")
    p.add_argument("--kappa", type=float, help="excitation weight (f16-paper value 0.5)")
    p.add_argument("--lambda-omega", dest="lambda_omega", type=float,
                   help="information-matrix filter rate (f16-paper value 10)")
    p.add_argument("--gamma0", type=float,
                   help="initial learning rate, scalar multiple of I (f16-paper value 10)")
    p.add_argument("--theta-cap", dest="theta_cap", type=float,
                   help="parameter projection cap (tool default 1.0, not set by f16-paper)")
    p.add_argument("--theta-margin", dest="theta_margin", type=float,
                   help="parameter projection margin (tool default 0.1, not set by f16-paper)")
    p.add_argument("--gamma-cap", dest="gamma_cap", type=float,
                   help="learning-rate Frobenius cap (tool default 100, not set by f16-paper)")
    p.add_argument("--gamma-margin", dest="gamma_margin", type=float,
                   help="learning-rate margin (tool default 10, not set by f16-paper)")
    p.add_argument("--command", help="command kind: step_train, constant, zero")
    p.add_argument("--period", type=float, help="step train period in s (tool default 10)")
    p.add_argument("--amplitude", type=float, help="step train amplitude (tool default 5)")
    p.add_argument("--value", type=float, help="constant command value")
    p.add_argument("--uncertainty", help="uncertainty kind: constant, sinusoid")
    p.add_argument("--sin-amplitude", dest="sin_amplitude", type=float,
                   help="sinusoid uncertainty amplitude (tool default 0.1)")
    p.add_argument("--sin-frequency", dest="sin_frequency", type=float,
                   help="sinusoid uncertainty frequency in Hz (tool default 0.2)")
    p.add_argument("--k-omega", dest="k_omega", type=float,
                   help="excitation margin factor (tool default 2)")
    p.add_argument("--rho-omega", dest="rho_omega", type=float,
                   help="information-matrix retention factor (tool default 0.5)")
    p.add_argument("--rho-gamma", dest="rho_gamma", type=float,
                   help="learning-rate retention factor (tool default 0.9)")
    p.add_argument("--dt", type=float, help="integration step in s (tool default 1e-3)")
    p.add_argument("--t-end", dest="t_end", type=float, help="horizon in s (tool default 60)")
    p.add_argument("--record-stride", dest="record_stride", type=int,
                   help="steps between records (tool default 10)")
    p.add_argument("--integrator", help="rk4 or euler (tool default rk4)")
    p.add_argument("--out", help="output directory (default from config)")
    p.add_argument("--prefix", help="output file prefix (default run)")
    p.add_argument("--no-plots", dest="no_plots", action="store_true",
                   help="skip figure rendering")


def _run_one(cfg: dict, variant: str | None = None):
    scenario, x0, x_hat0 = build_scenario(cfg)
    law = build_law(cfg, scenario, variant)
    sim = build_sim(cfg)
    traj = run(scenario, law, sim, x0=x0, x_hat0=x_hat0)
    return scenario, law, traj


def _bound_inputs(scenario, law, traj):
    gains = RateGains.from_law(law)
    if law.variant == "static":
        # No projection cap exists for the static law; report against the
        # largest recorded parameter error instead.
        ttm = float(np.max(traj.norm_theta_tilde))
    else:
        ttm = theta_tilde_bound(law.params.family, scenario.uncertainty.theta_star_max)
    return gains, ttm, scenario.uncertainty.theta_star_dot_max


def cmd_simulate(args) -> int:
    cfg = _resolve(args)
    scenario, law, traj = _run_one(cfg)
    outdir = Path(cfg["output"]["dir"])
    prefix = cfg["output"]["prefix"]

    window = None
    timeline = None
    if args.fe_window is not None:
        trace = RegressorTrace.create(traj.t, traj.phi)
        excfg = build_excitation_config(cfg)
        fe = detect_fe(trace, (args.fe_window[0], args.fe_window[1]), excfg)
        print(f"excitation over [{fe.t1:.3f}, {fe.t2:.3f}]: alpha = {fe.alpha:.6g}, "
              f"alpha0 = {fe.alpha0:.6g}, sufficient = {fe.meets_minimum}")
        if fe.meets_minimum:
            t3 = propagation_timeline(fe, excfg).t3
            if t3 >= float(traj.t[-1]):
                print("t3 lies beyond the horizon; envelope columns omitted")
            else:
                g3 = matrix_norm2(traj.gamma_at(traj.index_of(t3)))
                try:
                    timeline = propagation_timeline(
                        fe, excfg,
                        rho_gamma=float(cfg["excitation"]["rho_gamma"]),
                        lambda_gamma=float(cfg["law"]["lambda_gamma"]),
                        gamma_t3=g3,
                    )
                except ValueError as exc:
                    raise ConfigError(str(exc)) from exc
                window = (timeline.t3, min(timeline.t4, float(traj.t[-1])))
        else:
            print("window below the minimum excitation level; envelope columns omitted")

    gains, ttm, tsd = _bound_inputs(scenario, law, traj)
    report = build_bound_report(traj, scenario.cert, gains, ttm, tsd, window=window)

    paths = [
        write_trajectory_csv(traj, outdir / f"{prefix}_trajectory.csv"),
        write_bound_csv(report, outdir / f"{prefix}_bounds.csv"),
    ]
    if cfg["output"]["plots"]:
        from . import report as figs

        paths += figs.render_trajectory_figures(traj, outdir, prefix)
        paths += figs.render_bound_figures(traj, report, outdir, prefix)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_compare(args) -> int:
    cfg = _resolve(args)
    variants = [v.strip() for v in args.laws.split(",") if v.strip()]
    if not variants:
        raise ConfigError("--laws needs at least one variant")
    for v in variants:
        if v not in _VARIANT_ALIASES:
            raise ConfigError(f"unknown law variant {v!r}")
    labeled = []
    for v in variants:
        _, law, traj = _run_one(cfg, variant=v)
        labeled.append((law.variant, traj))
    outdir = Path(cfg["output"]["dir"])
    prefix = cfg["output"]["prefix"]
    paths = [write_compare_csv(labeled, outdir / f"{prefix}_compare.csv")]
    if cfg["output"]["plots"]:
        from . import report as figs

        paths += figs.render_comparison_figures(labeled, outdir, prefix)
    for p in paths:
        print(f"wrote {p}")
    return 0


def cmd_excite(args) -> int:
    cfg = _resolve(args)
    if args.window is None and args.pe_interval is None:
        raise ConfigError("pass --window T1 T2 for a single window or --pe-interval T")
    if args.trace:
        trace = read_regressor_csv(args.trace)
    else:
        _, _, traj = _run_one(cfg)
        trace = RegressorTrace.create(traj.t, traj.phi)
    excfg = build_excitation_config(cfg)

    if args.window is not None:
        rep = detect_fe(trace, (args.window[0], args.window[1]), excfg)
    else:
        stride = args.pe_stride if args.pe_stride else args.pe_interval
        rep = detect_pe(trace, args.pe_interval, stride, excfg)

    print(f"kind:            {rep.kind}")
    print(f"window:          [{rep.t1:.6g}, {rep.t2:.6g}] (T = {rep.T:.6g} s)")
    print(f"alpha:           {rep.alpha:.6g}")
    print(f"signal bound d:  {rep.d:.6g}")
    print(f"alpha0:          {rep.alpha0:.6g}")
    print(f"sufficient:      {rep.meets_minimum}")
    timeline = None
    if rep.meets_minimum:
        timeline = propagation_timeline(rep, excfg)
        print(f"omega floor:     {timeline.omega_fe:.6g} on [{rep.t2:.6g}, {timeline.t3:.6g}]")
        if timeline.alpha0_prime is not None:
            print(f"per-window alpha0 (persistent): {timeline.alpha0_prime:.6g}")

    outdir = Path(cfg["output"]["dir"])
    prefix = cfg["output"]["prefix"]
    paths = [write_excitation_csv(rep, timeline, outdir / f"{prefix}_excitation.csv")]
    if cfg["output"]["plots"]:
        from . import report as figs

        paths += figs.render_excitation_figure(trace, rep, outdir, prefix)
    for p in paths:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvmrac",
        description="Adaptive estimation with time-varying learning rates: "
                    "simulate, compare laws, analyze excitation.",
    )
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("simulate", help="run one closed-loop simulation")
    _add_common(p)
    p.add_argument("--fe-window", dest="fe_window", type=float, nargs=2,
                   metavar=("T1", "T2"),
                   help="analyze this window for finite excitation and add the decay envelope")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="run several laws on the identical scenario")
    _add_common(p)
    p.add_argument("--laws", default="static,tv_projected",
                   help="comma-separated variants (default static,tv_projected)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("excite", help="excitation analysis of a regressor trace")
    _add_common(p)
    p.add_argument("--trace", help="CSV with a time column and regressor columns "
                                   "(default: simulate the configured scenario)")
    p.add_argument("--window", type=float, nargs=2, metavar=("T1", "T2"),
                   help="single-window (finite excitation) analysis")
    p.add_argument("--pe-interval", dest="pe_interval", type=float,
                   help="moving-window length for persistent-excitation analysis")
    p.add_argument("--pe-stride", dest="pe_stride", type=float,
                   help="moving-window stride (default: the window length)")
    p.set_defaults(func=cmd_excite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CertificateError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
