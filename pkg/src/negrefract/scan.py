"""Parameter sweeps behind the command-line tool.

Each ``run_*`` function returns a :class:`ScanResult` holding metadata and
named columns; :func:`write_result` serializes it to CSV or JSON.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import __version__
from .anisotropy import index_vs_angle
from .errors import ConfigurationError, ResponseError
from .linear_response import BroadeningSpec, polarizability_quartet
from .liouville import deviation, probe_fields, separated_polarizabilities
from .params import UNIT_CONVENTION, ProbeDetunings, params_from_config
from .pipeline import COMPLEX_FIELDS, evaluate_point, evaluate_response

log = logging.getLogger(__name__)

SWEEP_VARIABLES = ("detuning", "density", "phase", "omegac_abs", "theta", "probe_amplitude")
UNITS = ("gamma2", "gammap", "si")


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        if self.variable not in SWEEP_VARIABLES:
            raise ConfigurationError(f"unknown sweep variable {self.variable!r}")
        if int(self.points) != self.points or self.points < 2:
            raise ConfigurationError("a sweep needs at least 2 points")
        if not self.start < self.stop:
            raise ConfigurationError("sweep start must be below stop")
        if self.scale not in ("linear", "log"):
            raise ConfigurationError("scale must be 'linear' or 'log'")
        if self.scale == "log" and self.start <= 0:
            raise ConfigurationError("logarithmic sweep needs a positive start")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass
class ScanResult:
    command: str
    metadata: dict
    columns: dict = field(default_factory=dict)

    @property
    def n_rows(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0

    @property
    def n_errors(self) -> int:
        err = self.columns.get("error")
        return 0 if err is None else sum(1 for e in err if e)


class Context:
    """Configuration resolved into physical objects."""

    def __init__(self, cfg: dict):
        self.cfg = dict(cfg)
        self.params = params_from_config(cfg)
        g2 = self.params.gamma2
        self.gamma2 = g2
        self.gammap = cfg["gammap_over_gamma2"] * g2
        self.density = float(cfg["density_cm3"])
        try:
            self.broadening = BroadeningSpec(
                gammap=self.gammap,
                doppler_sigma=cfg.get("doppler_sigma_over_gamma2", 0.0) * g2,
                doppler_nodes=int(cfg.get("doppler_nodes", 41)),
            )
        except ResponseError as exc:
            raise ConfigurationError(str(exc)) from exc
        if self.density < 0:
            raise ConfigurationError("density must be >= 0")

    def unit(self, units: str) -> float:
        """Size of one detuning unit in rad/s."""
        if units == "gamma2":
            return self.gamma2
        if units == "gammap":
            if self.gammap == 0:
                raise ConfigurationError("gammap units requested but gammap = 0")
            return self.gammap
        if units == "si":
            return 1.0
        raise ConfigurationError(f"unknown units {units!r}")

    def metadata(self, command: str, **extra) -> dict:
        meta = {
            "command": command,
            "package_version": __version__,
            "unit_convention": UNIT_CONVENTION,
        }
        meta.update({f"config.{k}": v for k, v in self.cfg.items() if v is not None})
        meta.update({f"param.{k}": v for k, v in self.params.as_dict().items()})
        meta.update(extra)
        return meta


def _table_columns(table) -> dict:
    cols = {}
    for k in COMPLEX_FIELDS:
        cols[k] = table[k]
    cols["fom"] = table["fom"]
    cols["branch"] = table["branch"]
    cols["error"] = table["error"]
    return cols


def default_units(ctx: Context, command: str) -> str:
    if command in ("spectrum", "nonchiral") and ctx.density <= 1e15:
        return "gamma2"
    return "gammap" if ctx.gammap > 0 else "gamma2"


def _spectrum_sweep(ctx, units, points, start, stop):
    u = ctx.unit(units)
    if start is None or stop is None:
        half = 5e3 * ctx.gamma2 if (ctx.density <= 1e15 or ctx.gammap == 0) else 0.5 * ctx.gammap
        start = -half / u if start is None else start
        stop = half / u if stop is None else stop
    return SweepSpec("detuning", start, stop, points), u


def run_spectrum(cfg, points=2001, start=None, stop=None, units=None, nonchiral=False, handedness="+"):
    """Detuning spectrum of every response quantity."""
    ctx = Context(cfg)
    name = "nonchiral" if nonchiral else "spectrum"
    units = units or default_units(ctx, name)
    sweep, u = _spectrum_sweep(ctx, units, points, start, stop)
    x = sweep.values()
    table = evaluate_response(ctx.params, x * u, ctx.density, ctx.broadening, nonchiral, handedness)
    meta = ctx.metadata(name, sweep=sweep.variable, units=units, start=sweep.start, stop=sweep.stop,
                        points=sweep.points, handedness=handedness, nonchiral=nonchiral)
    return ScanResult(name, meta, {f"Delta_{units}": x, **_table_columns(table)})


def _fixed_delta(ctx, delta, units, default_gp):
    units = units or ("gammap" if ctx.gammap > 0 else "gamma2")
    if delta is None:
        return default_gp * ctx.gammap, units, default_gp * ctx.gammap / ctx.unit(units)
    return delta * ctx.unit(units), units, delta


def _point_rows(evaluate, xs):
    """Evaluate a scalar function per sweep value; collect rows with an error column."""
    cols = {k: np.full(len(xs), np.nan + 1j * np.nan) for k in COMPLEX_FIELDS}
    fom = np.full(len(xs), np.nan)
    branch = np.full(len(xs), "", dtype=object)
    err = np.full(len(xs), "", dtype=object)
    for i, x in enumerate(xs):
        try:
            res = evaluate(x)
        except ResponseError as exc:
            err[i] = f"{type(exc).__name__}: {exc}"
            continue
        for k in COMPLEX_FIELDS:
            cols[k][i] = res[k]
        fom[i] = res["fom"]
        branch[i] = res["branch"]
    return {**cols, "fom": fom, "branch": branch, "error": err}


def run_phase(cfg, points=361, start=0.0, stop=2 * math.pi, delta=None, units=None):
    """Response at fixed detuning versus the coupling-field phase."""
    ctx = Context(cfg)
    D, units, dval = _fixed_delta(ctx, delta, units, -0.045)
    sweep = SweepSpec("phase", start, stop, points)
    xs = sweep.values()
    rows = _point_rows(
        lambda ph: evaluate_point(ctx.params.with_coupling(phase=ph), D, ctx.density, ctx.broadening), xs
    )
    meta = ctx.metadata("phase", sweep="phase", units=units, delta=dval, start=start, stop=stop, points=points)
    return ScanResult("phase", meta, {"phi_rad": xs, **rows})


def run_density(cfg, points=301, start=1e14, stop=1e17, delta=None, units=None):
    """Response at fixed detuning versus number density (log sweep)."""
    ctx = Context(cfg)
    D, units, dval = _fixed_delta(ctx, delta, units, -0.045)
    sweep = SweepSpec("density", start, stop, points, "log")
    xs = sweep.values()
    rows = _point_rows(lambda r: evaluate_point(ctx.params, D, r, ctx.broadening), xs)
    meta = ctx.metadata("density", sweep="density", units=units, delta=dval, start=start, stop=stop,
                        points=points, scale="log")
    return ScanResult("density", meta, {"density_cm3": xs, "log10_density": np.log10(xs), **rows})


def run_tunability(cfg, points=301, start=1e-2, stop=1e1, delta=None, units=None, density=None):
    """Index versus coupling strength ``|Omega_c|/gamma3`` (log sweep)."""
    ctx = Context(cfg)
    rho = 1.56e17 if density is None else density
    D, units, dval = _fixed_delta(ctx, delta, units, 0.0117)
    sweep = SweepSpec("omegac_abs", start, stop, points, "log")
    xs = sweep.values()
    g3 = ctx.params.gamma3
    rows = _point_rows(
        lambda r: evaluate_point(ctx.params.with_coupling(r * g3), D, rho, ctx.broadening), xs
    )
    meta = ctx.metadata("tunability", sweep="omegac_abs", units=units, delta=dval, density=rho,
                        start=start, stop=stop, points=points, scale="log")
    return ScanResult("tunability", meta,
                      {"omegac_over_gamma3": xs, "log10_omegac_over_gamma3": np.log10(xs), **rows})


def run_angle(cfg, points=181, start=0.0, stop=math.pi, delta=None, units=None, density=None):
    """Index versus propagation angle from scalar response at one operating point."""
    ctx = Context(cfg)
    rho = 5e16 if density is None else density
    D, units, dval = _fixed_delta(ctx, delta, units, -0.035)
    sweep = SweepSpec("theta", start, stop, points)
    xs = sweep.values()
    err = np.full(points, "", dtype=object)
    try:
        op = evaluate_point(ctx.params, D, rho, ctx.broadening)
        n = np.asarray(index_vs_angle(op["eps"], op["mu"], op["xiEH"], op["xiHE"], xs))
    except ResponseError as exc:
        op = None
        n = np.full(points, np.nan + 1j * np.nan)
        err[:] = f"{type(exc).__name__}: {exc}"
    with np.errstate(divide="ignore", invalid="ignore"):
        fom = np.where(n.imag == 0, np.inf, -n.real / n.imag)
    meta = ctx.metadata("angle", sweep="theta", units=units, delta=dval, density=rho,
                        start=start, stop=stop, points=points)
    if op is not None:
        for k in ("eps", "mu", "xiEH", "xiHE"):
            meta[f"operating_point.{k}"] = op[k]
    return ScanResult("angle", meta, {"theta_rad": xs, "n": n, "fom": fom, "error": err})


def _oracle_row(ctx, D, OE, ratio, broadening):
    params = ctx.params
    det = ProbeDetunings.from_delta(D)
    E, B = probe_fields(params, OE, OE / ratio)
    ex = separated_polarizabilities(params, det, E, B, broadening).as_array()
    lin = polarizability_quartet(params, det, broadening=broadening).as_array()
    return ex, lin


def run_saturation(cfg, points=201, start=None, stop=None, amplitudes=(1e-3, 1.0, 10.0), ratio=137.0,
                   units=None, gammap=0.0, workers=None):
    """Exact-versus-linear deviation across a detuning sweep for several probe strengths.

    ``amplitudes`` are electric probe Rabi frequencies in units of gamma2;
    the magnetic one is smaller by ``ratio``. Homogeneous broadening is off
    unless ``gammap`` (units of gamma2) is given.
    """
    ctx = Context(cfg)
    units = units or "gamma2"
    u = ctx.unit(units)
    start = -5e3 * ctx.gamma2 / u if start is None else start
    stop = 5e3 * ctx.gamma2 / u if stop is None else stop
    sweep = SweepSpec("detuning", start, stop, points)
    xs = sweep.values()
    if any(a <= 0 for a in amplitudes):
        raise ConfigurationError("probe amplitudes must be positive")
    b = BroadeningSpec(gammap=gammap * ctx.gamma2)
    jobs = [(a, x) for a in amplitudes for x in xs]

    def one(job):
        a, x = job
        try:
            ex, lin = _oracle_row(ctx, x * u, a * ctx.gamma2, ratio, b)
        except ResponseError as exc:
            return None, None, f"{type(exc).__name__}: {exc}"
        return ex, lin, ""

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, jobs))

    names = ("aEE", "aEB", "aBE", "aBB")
    cols = {"OmegaE_gamma2": np.array([a for a, _ in jobs]), f"Delta_{units}": np.array([x for _, x in jobs])}
    for k in names:
        for part in ("re", "im"):
            cols[f"dev_{k}_{part}"] = np.full(len(jobs), np.nan)
    for k in names:
        cols[f"exact_{k}"] = np.full(len(jobs), np.nan + 1j * np.nan)
        cols[f"linear_{k}"] = np.full(len(jobs), np.nan + 1j * np.nan)
    err = np.full(len(jobs), "", dtype=object)
    for i, (ex, lin, e) in enumerate(results):
        if e:
            err[i] = e
            continue
        for j, k in enumerate(names):
            cols[f"exact_{k}"][i] = ex[j]
            cols[f"linear_{k}"][i] = lin[j]
            try:
                cols[f"dev_{k}_re"][i] = deviation(ex[j], lin[j], "real")
                cols[f"dev_{k}_im"][i] = deviation(ex[j], lin[j], "imag")
            except ResponseError as exc:
                err[i] = f"{type(exc).__name__}: {exc}"
    cols["error"] = err
    meta = ctx.metadata("saturation", sweep="detuning", units=units, start=start, stop=stop, points=points,
                        amplitudes_gamma2=list(amplitudes), ratio=ratio, gammap_over_gamma2=gammap)
    return ScanResult("saturation", meta, cols)


@dataclass
class ImpedanceReport:
    found: bool
    Delta: float
    omegac_abs: float
    zinv: complex
    n: complex
    fom: float
    objective: float
    response: dict = field(default_factory=dict)


def find_impedance_match(ctx: Context, density=1.56e17, n_target=-1.0 + 0j, cap=1e-2,
                         delta_range=(-0.1, 0.1), log_omegac_range=(3.0, 5.0),
                         grid=(201, 81), max_sweeps=60) -> ImpedanceReport:
    """Locate a reflection-free operating point with the requested index.

    Minimizes ``|Z^-1 - 1|**2 + |n - n_target|**2`` over detuning (units of
    gammap, or gamma2 when gammap = 0) and ``log10(|Omega_c|/gamma2)``: a
    coarse grid followed by alternating bounded 1-D refinements. Matching
    alone has trivial solutions with positive index, hence the index term.
    ``n_target=None`` drops it.
    """
    g2 = ctx.gamma2
    scale = ctx.gammap if ctx.gammap > 0 else g2
    params = ctx.params

    def objective_table(logw, deltas):
        t = evaluate_response(params.with_coupling(10.0**logw * g2), deltas * scale, density, ctx.broadening)
        obj = np.abs(t["zinv"] - 1.0) ** 2
        if n_target is not None:
            obj = obj + np.abs(t["n"] - n_target) ** 2
        return np.where(np.isfinite(obj), obj, np.inf)

    def objective(logw, delta):
        return float(objective_table(logw, np.array([delta]))[0])

    ds = np.linspace(*delta_range, grid[0])
    ls = np.linspace(*log_omegac_range, grid[1])
    best = (np.inf, ds[0], ls[0])
    for lw in ls:
        obj = objective_table(lw, ds)
        k = int(np.argmin(obj))
        if obj[k] < best[0]:
            best = (float(obj[k]), float(ds[k]), float(lw))
    f, d, lw = best
    hd = ds[1] - ds[0]
    hl = ls[1] - ls[0]
    for _ in range(max_sweeps):
        f_old, d_old, lw_old = f, d, lw
        r = minimize_scalar(lambda x: objective(lw, x), bounds=(d - hd, d + hd), method="bounded",
                            options={"xatol": 1e-12})
        if r.fun < f:
            f, d = float(r.fun), float(r.x)
        r = minimize_scalar(lambda x: objective(x, d), bounds=(lw - hl, lw + hl), method="bounded",
                            options={"xatol": 1e-12})
        if r.fun < f:
            f, lw = float(r.fun), float(r.x)
        if abs(d - d_old) <= 1e-10 * max(abs(d), 1e-12) and abs(lw - lw_old) <= 1e-10 * abs(lw) \
                and f_old - f <= 1e-16:
            break
    res = evaluate_point(params.with_coupling(10.0**lw * g2), d * scale, density, ctx.broadening)
    found = abs(res["zinv"] - 1.0) < cap
    return ImpedanceReport(found, d * scale, 10.0**lw * g2, res["zinv"], res["n"], res["fom"], f, res)


def run_impedance_find(cfg, density=None, n_target=-1.0, cap=1e-2, units=None):
    ctx = Context(cfg)
    rho = 1.56e17 if density is None else density
    units = units or ("gammap" if ctx.gammap > 0 else "gamma2")
    u = ctx.unit(units)
    rep = find_impedance_match(ctx, rho, None if n_target is None else complex(n_target), cap)
    meta = ctx.metadata("impedance-find", units=units, density=rho, cap=cap,
                        n_target=n_target, status="found" if rep.found else "not-found")
    cols = {
        f"Delta_{units}": np.array([rep.Delta / u]),
        "omegac_abs_gamma2": np.array([rep.omegac_abs / ctx.gamma2]),
        "log10_omegac_abs_gamma2": np.array([math.log10(rep.omegac_abs / ctx.gamma2)]),
        **{k: np.array([rep.response[k]]) for k in COMPLEX_FIELDS},
        "fom": np.array([rep.fom]),
        "objective": np.array([rep.objective]),
        "status": np.array(["found" if rep.found else "not-found"], dtype=object),
        "error": np.array([""], dtype=object),
    }
    return ScanResult("impedance-find", meta, cols), rep


# ---------------------------------------------------------------- output


def _flatten(columns: dict):
    names, data = [], []
    for k, v in columns.items():
        arr = np.asarray(v)
        if np.iscomplexobj(arr):
            names += [f"{k}_re", f"{k}_im"]
            data += [arr.real, arr.imag]
        else:
            names.append(k)
            data.append(arr)
    return names, data


def _cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def _meta_value(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def to_csv(result: ScanResult) -> str:
    lines = [f"# {k} = {json.dumps(_meta_value(v))}" for k, v in result.metadata.items()]
    names, data = _flatten(result.columns)
    lines.append(",".join(names))
    for i in range(result.n_rows):
        cells = []
        for col in data:
            s = _cell(col[i])
            if "," in s or '"' in s:
                s = '"' + s.replace('"', '""') + '"'
            cells.append(s)
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def to_json(result: ScanResult) -> str:
    names, data = _flatten(result.columns)
    rows = []
    for i in range(result.n_rows):
        row = []
        for col in data:
            x = col[i]
            if isinstance(x, (np.floating, float)):
                x = float(x)
                x = x if math.isfinite(x) else repr(x)
            elif isinstance(x, (np.integer,)):
                x = int(x)
            else:
                x = str(x)
            row.append(x)
        rows.append(row)
    meta = {k: _meta_value(v) for k, v in result.metadata.items()}
    return json.dumps({"metadata": meta, "columns": names, "rows": rows}, indent=1) + "\n"


def write_result(result: ScanResult, path=None, fmt="csv") -> str:
    text = to_csv(result) if fmt == "csv" else to_json(result)
    if path is None or path == "-":
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return text


def read_metadata(path) -> dict:
    """Metadata block of a CSV or JSON file written by :func:`write_result`."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return json.loads(text)["metadata"]
    meta = {}
    for line in text.splitlines():
        if not line.startswith("# "):
            break
        k, _, v = line[2:].partition(" = ")
        meta[k] = json.loads(v)
    return meta


def config_from_metadata(meta: dict) -> dict:
    return {k[len("config."):]: v for k, v in meta.items() if k.startswith("config.")}
