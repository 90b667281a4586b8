"""Command-line entry point: ``noise-reg {eigen,moments,simulate,verify,demo}``.

Settings are resolved as defaults < config file < explicit flags. A config
file is either ``key = value`` lines (``#`` starts a comment) or a saved run
manifest (JSON), which replays that run. Every run writes its output file
and a ``<output>.manifest.json`` sidecar atomically.

Exit status: 0 success, 2 invalid input, 3 a verified claim failed,
4 numerical blowup.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DEFAULT_SEED,
    CertificationFailure,
    ModelParams,
    ModeState,
    MomentVector,
    NumericalBlowup,
    RunManifest,
    SeedPolicy,
    ValidationError,
    validate_params,
)

EXIT_OK, EXIT_INVALID, EXIT_CLAIM, EXIT_BLOWUP = 0, 2, 3, 4
CLAIMS = ("lambda", "coef", "qf", "global", "gevrey", "continuity")


class ConfigParse(ValidationError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownKey(ValidationError):
    def __init__(self, key, valid):
        super().__init__(f"unknown key {key!r}; valid keys: {', '.join(sorted(valid))}")
        self.key = key
        self.valid = tuple(sorted(valid))


# ----------------------------------------------------------------- options


def _int(x):
    if isinstance(x, bool):
        raise ValueError("expected an integer")
    if isinstance(x, int):
        return x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    s = str(x).strip().replace("_", "")
    try:
        return int(s, 0)
    except ValueError:
        f = float(s)
        if not f.is_integer():
            raise
        return int(f)


def _float(x):
    return float(x)


def _str(x):
    return str(x).strip()


def _complex_str(x):
    s = str(x).strip().replace(" ", "")
    complex(s)  # validate
    return s


def _float_list(x):
    if isinstance(x, (list, tuple)):
        return [float(v) for v in x]
    return [float(v) for v in str(x).split(",") if v.strip()]


def _optional(conv):
    def f(x):
        if x is None or (isinstance(x, str) and x.strip().lower() in ("", "none", "auto")):
            return None
        return conv(x)
    return f


def _choice(*names):
    def f(x):
        s = str(x).strip()
        if s not in names:
            raise ValueError(f"expected one of {names}")
        return s
    return f


@dataclass(frozen=True)
class Opt:
    name: str
    conv: object
    default: object
    help: str


COMMON = [
    Opt("sigma", _float, 1.0, "noise amplitude"),
    Opt("horizon", _float, 1.0, "final time T"),
    Opt("workers", _optional(_int), None, "worker threads (default: NOISE_REG_WORKERS or CPU count)"),
    Opt("output", _optional(_str), None, "output file (default: <command>.csv or .json)"),
]

COMMANDS = {
    "eigen": [
        Opt("xi_min", _float, -10.0, "smallest frequency"),
        Opt("xi_max", _float, 10.0, "largest frequency"),
        Opt("xi_points", _int, 201, "number of frequencies"),
    ],
    "moments": [
        Opt("s", _float, 1.0, "Sobolev index of the displacement norm"),
        Opt("length", _float, 64.0, "periodic box length L"),
        Opt("n_points", _int, 4096, "grid points (power of two)"),
        Opt("t_points", _int, 11, "output times, uniform on [0, T]"),
        Opt("data", _choice("gaussian", "gevrey"), "gaussian", "initial displacement (velocity is zero)"),
        Opt("gevrey_s", _float, 2.0, "Gevrey order when --data gevrey"),
        Opt("xi_max", _float, 1e3, "frequency range for the certified constants"),
        Opt("grid_points", _int, 4001, "frequency grid size for the certified constants"),
    ],
    "simulate": [
        Opt("xi", _float, 2.0, "mode frequency"),
        Opt("u0", _complex_str, "1", "initial U (complex, e.g. 1+0.5j)"),
        Opt("v0", _complex_str, "0", "initial V"),
        Opt("scheme", _choice("euler_maruyama_ito", "heun_stratonovich", "exponential_split"),
            "euler_maruyama_ito", "time stepper"),
        Opt("dt", _optional(_float), None, "step size (default: from the stability budget)"),
        Opt("paths", _int, 10_000, "number of Monte Carlo paths"),
        Opt("seed", _int, DEFAULT_SEED, "64-bit master seed"),
        Opt("record", _optional(_float_list), None, "comma-separated output times (default: T/4 multiples)"),
        Opt("mode_index", _int, 0, "stream mode index"),
    ],
    "verify": [
        Opt("claim", _choice(*CLAIMS, "all"), "all", "claim to check"),
        Opt("xi_max", _float, 1e3, "frequency range"),
        Opt("grid_points", _int, 4001, "frequency grid size for the global certification"),
    ],
    "demo": [
        Opt("s_data", _float, 3.0, "Gevrey order of the data exp(-|xi|^(1/s))"),
        Opt("cutoffs", _float_list, [64.0, 128.0, 256.0, 512.0], "comma-separated frequency cutoffs"),
        Opt("length", _float, 64.0, "box length setting the frequency spacing 2 pi / L"),
    ],
}


def options_for(command):
    return {o.name: o for o in COMMON + COMMANDS[command]}


def parse_config_text(text: str, command: str) -> dict:
    """Parse ``key = value`` lines into converted option values."""
    opts = options_for(command)
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigParse("expected 'key = value'", lineno, col)
        key_part, value = line.split("=", 1)
        key = key_part.strip().replace("-", "_")
        if not key:
            raise ConfigParse("missing key before '='", lineno, line.index("=") + 1)
        if key not in opts:
            raise UnknownKey(key, opts)
        vcol = len(key_part) + 2 + (len(value) - len(value.lstrip()))
        value = value.strip()
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "'\"":
            value = value[1:-1]
        try:
            out[key] = opts[key].conv(value)
        except (ValueError, TypeError) as exc:
            raise ConfigParse(f"bad value for {key}: {exc}", lineno, vcol) from None
    return out


def load_config(path, command: str) -> dict:
    """Option values from a key=value file or a saved manifest (replay)."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            manifest = RunManifest.from_json(text)
        except (ValueError, KeyError, TypeError) as exc:
            raise ValidationError(f"{path} is not a valid run manifest: {exc}") from None
        if manifest.command != command:
            raise ValidationError(f"manifest is for {manifest.command!r}, not {command!r}")
        opts = options_for(command)
        out = {}
        for k, v in manifest.options.items():
            if k not in opts:
                raise UnknownKey(k, opts)
            out[k] = opts[k].conv(v)
        return out
    return parse_config_text(text, command)


# --------------------------------------------------------------- writing


def atomic_write(path, data: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def manifest_path(output) -> Path:
    return Path(str(output) + ".manifest.json")


# -------------------------------------------------------------- commands


def _default_workers():
    env = os.environ.get("NOISE_REG_WORKERS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValidationError(f"NOISE_REG_WORKERS must be an integer, got {env!r}") from None
        if n < 1:
            raise ValidationError("NOISE_REG_WORKERS must be positive")
        return n
    return os.cpu_count() or 1


def cmd_eigen(o, m):
    from .moments import eigenvalues

    validate_params(ModelParams(o["sigma"], o["horizon"]), "deterministic")
    if o["xi_points"] < 1:
        raise ValidationError("xi_points must be positive")
    xi = np.linspace(o["xi_min"], o["xi_max"], o["xi_points"])
    gamma, delta, lp, lm = eigenvalues(xi, o["sigma"])
    m.grids = {"xi": {"min": o["xi_min"], "max": o["xi_max"], "points": o["xi_points"]}}
    header = ["xi", "gamma", "re_delta", "im_delta", "re_lambda_plus", "im_lambda_plus",
              "re_lambda_minus", "im_lambda_minus"]
    rows = zip(xi, gamma, delta.real, delta.imag, np.real(lp), np.imag(lp), np.real(lm), np.imag(lm))
    return to_csv(header, rows), EXIT_OK


def cmd_moments(o, m):
    from .spectral import FieldSnapshot, GevreyDatum, SpatialGrid, evolve_field_moments, synthesize_gevrey
    from .verify import estimate_global_constants

    p = validate_params(ModelParams(o["sigma"], o["horizon"]), "deterministic")
    grid = SpatialGrid(o["n_points"], o["length"])
    if o["t_points"] < 1:
        raise ValidationError("t_points must be positive")
    zero = np.zeros(grid.n_points)
    if o["data"] == "gaussian":
        x = grid.x - grid.length / 2
        phi0 = FieldSnapshot(grid, np.exp(-0.5 * x * x), zero)
    else:
        phi0 = synthesize_gevrey(GevreyDatum(o["gevrey_s"]), grid)
    phi1 = FieldSnapshot(grid, zero, zero)
    ts = np.linspace(0.0, p.horizon, o["t_points"])
    series = evolve_field_moments(phi0, phi1, p, o["s"], ts)
    xi_max = max(o["xi_max"], float(np.abs(grid.xi).max()))
    try:
        c = estimate_global_constants(p.sigma, p.horizon, xi_max, o["grid_points"])
        rhs = c.C1 * np.exp(c.C2 * ts) * series.initial_bracket
        m.grids["constants"] = {"C1": c.C1, "C2": c.C2, "xi0": c.xi0, "M": c.M}
    except CertificationFailure as exc:
        # no uniform constants (sigma = 0): the bound column is undefined
        rhs = np.full_like(ts, math.nan)
        m.grids["constants"] = {"error": str(exc)}
    m.grids.update({"spatial": {"n_points": grid.n_points, "length": grid.length},
                    "frequency": {"dxi": grid.dxi, "xi_max": float(np.abs(grid.xi).max())},
                    "certification_xi_max": xi_max})
    rows = zip(ts, [o["s"]] * len(ts), series.norm_u_sq, series.norm_v_sq, rhs)
    return to_csv(["t", "sobolev_s", "norm_U_sq", "norm_V_sq", "bound_rhs"], rows), EXIT_OK


def cmd_simulate(o, m):
    from .moments import evolve_moments_exact
    from .sde import SchemeSpec, simulate_paths

    p = validate_params(ModelParams(o["sigma"], o["horizon"]))
    xi = o["xi"]
    if o["dt"] is None:
        spec = SchemeSpec.for_budget(o["scheme"], p.horizon, xi, p.sigma, multiple_of=4)
    else:
        steps = int(round(p.horizon / o["dt"]))
        if steps < 1 or abs(steps * o["dt"] - p.horizon) > 1e-9 * p.horizon:
            raise ValidationError("horizon must be an integer multiple of dt")
        spec = SchemeSpec(o["scheme"], p.horizon / steps, steps).refined(xi, p.sigma)
    record = o["record"] if o["record"] is not None else [k * p.horizon / 4 for k in range(5)]
    u0, v0 = complex(o["u0"]), complex(o["v0"])
    seeds = SeedPolicy(o["seed"])
    m.seed_policy = seeds
    m.scheme = {"name": spec.scheme, "dt": spec.dt, "steps": spec.steps}
    m.grids = {"xi": xi, "record_times": list(record)}
    est = simulate_paths(xi, p.sigma, ModeState(u0, v0, xi), spec, o["paths"], seeds, record,
                         mode_index=o["mode_index"], workers=o["workers"])
    m0 = MomentVector.from_state(u0, v0)
    rows = []
    for e in est:
        ex = evolve_moments_exact(m0, xi, p.sigma, e.t)
        rows.append([e.t, *e.m_hat.as_array(), *e.stderr, *ex.as_array()])
    header = ["t", "m1_hat", "m2_hat", "m3_hat", "se1", "se2", "se3", "m1_exact", "m2_exact", "m3_exact"]
    return to_csv(header, rows), EXIT_OK


def run_claims(claims, sigma, horizon, xi_max, grid_points):
    from . import verify as v

    reports = []
    for claim in claims:
        if claim == "lambda":
            reports.append(v.verify_lambda_bound(sigma, v.abscissa_grid(sigma, xi_max) if sigma > 0 else None))
        elif claim == "coef":
            if sigma > 0:
                reports.extend(v.verify_coefficient_bounds(sigma, xi_max=xi_max))
            else:
                reports.append(v.BoundReport("coef", {}, (v.Check("C", math.inf, math.nan),),
                                             {"error": "coefficient bounds need sigma > 0"}, False))
        elif claim == "qf":
            if sigma > 0:
                reports.append(v.verify_qF_control(sigma))
            else:
                reports.append(v.BoundReport("qf", {}, (v.Check("C", math.inf, math.nan),),
                                             {"error": "eigen-coordinates need sigma > 0"}, False))
        elif claim == "global":
            reports.append(v.verify_global(sigma, horizon, xi_max, grid_points))
        elif claim == "gevrey":
            reports.append(v.verify_gevrey(sigma, horizon=horizon))
        elif claim == "continuity":
            reports.append(v.verify_time_continuity(sigma))
    return reports


def cmd_verify(o, m):
    claims = CLAIMS if o["claim"] == "all" else (o["claim"],)
    if not (o["sigma"] >= 0 and o["horizon"] > 0 and o["xi_max"] > 10):
        raise ValidationError("need sigma >= 0, horizon > 0 and xi_max > 10")
    reports = run_claims(claims, o["sigma"], o["horizon"], o["xi_max"], o["grid_points"])
    for r in reports:
        print(r.summary())
    m.grids = {"xi_max": o["xi_max"], "grid_points": o["grid_points"]}
    from .core import _jsonable

    text = json.dumps([_jsonable(r.to_dict()) for r in reports], indent=2, sort_keys=True) + "\n"
    return text, EXIT_OK if all(r.passed for r in reports) else EXIT_CLAIM


def cmd_demo(o, m):
    from .verify import gevrey_threshold_demo

    p = validate_params(ModelParams(o["sigma"], o["horizon"]), "deterministic")
    tab = gevrey_threshold_demo(p.sigma, o["s_data"], o["cutoffs"], p.horizon, o["length"])
    print(f"sigma={p.sigma} s_data={o['s_data']} verdict={tab.verdict}")
    m.grids = {"cutoffs": list(tab.cutoffs), "dxi": 2 * math.pi / o["length"]}
    ratios = (math.nan,) + tab.ratios
    rows = [[p.sigma, o["s_data"], c, n, r, tab.verdict] for c, n, r in zip(tab.cutoffs, tab.norms, ratios)]
    return to_csv(["sigma", "s_data", "cutoff", "norm_sq", "ratio_to_previous", "verdict"], rows), EXIT_OK


HANDLERS = {"eigen": cmd_eigen, "moments": cmd_moments, "simulate": cmd_simulate, "verify": cmd_verify,
            "demo": cmd_demo}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noise-reg", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None, help="key=value file or saved manifest to replay")
        for o in COMMON + COMMANDS[name]:
            sp.add_argument("--" + o.name.replace("_", "-"), dest=o.name, default=argparse.SUPPRESS,
                            help=o.help if "default:" in o.help else f"{o.help} (default: {o.default})")
    return parser


def resolve(command, given: dict, config_path=None) -> dict:
    opts = options_for(command)
    resolved = {k: o.default for k, o in opts.items()}
    if config_path is not None:
        resolved.update(load_config(config_path, command))
    for k, raw in given.items():
        try:
            resolved[k] = opts[k].conv(raw)
        except (ValueError, TypeError) as exc:
            raise ValidationError(f"--{k.replace('_', '-')}: {exc}") from None
    return resolved


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    command = args.command
    given = {k: v for k, v in vars(args).items() if k not in ("command", "config")}
    try:
        o = resolve(command, given, args.config)
        if o["workers"] is None:
            o["workers"] = _default_workers()
        if o["workers"] < 1:
            raise ValidationError("workers must be positive")
        ext = "json" if command == "verify" else "csv"
        output = Path(o["output"] or f"{command}.{ext}")
        o["output"] = str(output)
        manifest = RunManifest(command, options=dict(o), params=ModelParams(o["sigma"], o["horizon"])).stamp()
        manifest.outputs = [str(output), str(manifest_path(output))]
        print(manifest.to_json(), file=sys.stderr)
        text, status = HANDLERS[command](o, manifest)
        atomic_write(output, text)
        atomic_write(manifest_path(output), manifest.to_json() + "\n")
        return status
    except NumericalBlowup as exc:
        print(f"error: numerical blowup: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except CertificationFailure as exc:
        print(f"error: claim failed: {exc}", file=sys.stderr)
        return EXIT_CLAIM
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
