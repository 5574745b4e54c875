"""Experiment configuration, single runs and parameter sweeps.

A configuration is a flat ``key = value`` text with one dotted namespace
level, for example::

    params.N = 3
    params.lambda1 = 1
    params.p1 = 2
    grid.R = 20
    grid.M = 2048
    stepping.dt = 1e-3
    init.kind = gaussian
    run.frame = lens
    run.s_end = 0.99
    run.monitors = decay, gronwall

A JSON object with the same keys, flat or nested by section, is accepted as
well.  Every run writes into ``<out_root>/<run_id>`` where ``run_id`` is a
content hash of the canonical configuration (and of the initial-datum file,
if one is used), so identical configurations map to the same directory.
"""

from __future__ import annotations

import contextlib
import csv
import dataclasses
import hashlib
import io
import itertools
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Optional, Sequence

import numpy as np
import scipy

from . import __version__
from .criteria import DataStats, classify
from .diagnostics import (
    LedgerRecord,
    bump,
    decay_fit,
    gronwall_exponent_check,
    ledger_csv,
    ledger_start,
    ledger_update,
    pairing_drift,
    physical_record,
    witness_from_series,
)
from .errors import LabError, ParameterError, SolverError
from .ground_state import ground_state
from .propagators import LensState, StepperConfig, iter_lens, iter_physical, picard_iterates
from .pseudoconformal import (
    check_identities,
    extract_scattering_state,
    lens_time,
    physical_time,
    to_lens,
)
from .radial import (
    ModelParams,
    RadialField,
    energy,
    from_csv,
    gaussian,
    lp_integral,
    make_grid,
    norm_l2,
    norm_sigma,
    pairing,
    random_field,
    resample,
    to_csv,
)

log = logging.getLogger(__name__)

FRAMES = ("physical", "lens", "both")
MONITORS = ("decay", "extract", "witness", "gronwall", "picard")
INIT_KINDS = ("gaussian", "file", "random")
DECAY_ORDERS = (4.0, 6.0)

# section -> {key: RunConfig attribute}
_SCHEMA = {
    "params": {"N": "N", "lambda1": "lambda1", "lambda2": "lambda2", "p1": "p1", "p2": "p2"},
    "grid": {"R": "R", "M": "M"},
    "stepping": {"dt": "dt", "near_one_ratio": "near_one_ratio"},
    "init": {"kind": "init_kind", "amplitude": "amplitude", "width": "width", "file": "init_file"},
    "run": {"frame": "frame", "t_end": "t_end", "s_end": "s_end", "monitors": "monitors",
            "seed": "seed", "record_every": "record_every"},
    "extract": {"eps": "extract_eps"},
    "witness": {"r0": "witness_r0", "window": "witness_window"},
    "picard": {"iters": "picard_iters"},
}


class ConfigError(ParameterError):
    """Malformed or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    R: float = 20.0
    M: int = 2048
    dt: float = 1e-3
    near_one_ratio: float = 0.05
    init_kind: str = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    init_file: Optional[str] = None
    frame: str = "physical"
    t_end: Optional[float] = None
    s_end: Optional[float] = None
    monitors: tuple = ()
    seed: int = 0
    record_every: int = 1
    extract_eps: tuple = (0.1, 0.05, 0.025)
    witness_r0: float = 2.0
    witness_window: tuple = (0.5, 0.99)
    picard_iters: int = 8

    def __post_init__(self):
        if self.frame not in FRAMES:
            raise ConfigError(f"run.frame must be one of {FRAMES}, got {self.frame!r}")
        if self.init_kind not in INIT_KINDS:
            raise ConfigError(f"init.kind must be one of {INIT_KINDS}, got {self.init_kind!r}")
        if self.init_kind == "file" and not self.init_file:
            raise ConfigError("init.kind = file needs init.file")
        bad = [m for m in self.monitors if m not in MONITORS]
        if bad:
            raise ConfigError(f"unknown monitors {bad}; choose from {MONITORS}")
        if self.record_every < 1:
            raise ConfigError("run.record_every must be >= 1")
        if self.frame in ("lens", "both"):
            if self.s_end is None and self.t_end is None:
                raise ConfigError("a lens-frame run needs run.s_end")
            s_end = self.lens_end
            if not 0 < s_end < 1:
                raise ConfigError(f"run.s_end must lie in (0, 1), got {s_end}")
            if self.frame == "both" and self.t_end is not None and self.s_end is not None:
                if not math.isclose(lens_time(self.t_end), self.s_end, rel_tol=1e-12):
                    raise ConfigError("run.t_end and run.s_end disagree: s_end must equal t_end/(1+t_end)")
        else:
            if self.t_end is None or not self.t_end > 0:
                raise ConfigError("a physical-frame run needs run.t_end > 0")
        if "picard" in self.monitors and self.frame == "lens":
            raise ConfigError("the picard monitor needs a physical-frame run")
        if "extract" in self.monitors and not self.extract_stops:
            raise ConfigError("extract.eps must hold at least two values with 1 - eps <= s_end")
        # validates dt and the near-one ratio
        self.stepper
        make_grid(self.R, self.M, self.params.N)

    @property
    def stepper(self) -> StepperConfig:
        return StepperConfig(dt=self.dt, near_one_ratio=self.near_one_ratio)

    @property
    def lens_end(self) -> float:
        return self.s_end if self.s_end is not None else lens_time(self.t_end)

    @property
    def physical_end(self) -> float:
        return self.t_end if self.t_end is not None else physical_time(self.s_end)

    @property
    def extract_stops(self) -> tuple:
        stops = sorted({1.0 - e for e in self.extract_eps if 0 < e < 1
                        and 1.0 - e <= self.lens_end + 1e-15})
        return tuple(stops) if len(stops) >= 2 else ()

    def to_dict(self) -> dict:
        """Nested canonical form; ``config_from_dict`` inverts it."""
        out: dict = {}
        for section, keys in _SCHEMA.items():
            sec = {}
            for key, attr in keys.items():
                value = getattr(self.params, attr) if section == "params" else getattr(self, attr)
                sec[key] = _canonical(f"{section}.{key}", value)
            out[section] = sec
        return out

    def to_text(self) -> str:
        lines = []
        for section, sec in self.to_dict().items():
            for key, value in sec.items():
                lines.append(f"{section}.{key} = {_format_value(value)}")
        return "\n".join(lines) + "\n"

    def run_id(self) -> str:
        """Content hash; a datum file enters through its bytes, not its path."""
        data = self.to_dict()
        if self.init_kind == "file":
            data["init"]["file"] = hashlib.sha256(Path(self.init_file).read_bytes()).hexdigest()
        else:
            data["init"]["file"] = None
        payload = json.dumps(data, sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


def _canonical(key: str, value):
    if isinstance(value, (tuple, list)):
        return [_canonical(key, v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if key in _INT_KEYS:
        return int(value)
    return float(value)


def _format_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, (list, tuple)):
        return ", ".join(_format_value(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_scalar(text: str):
    t = text.strip()
    if t.lower() in ("none", "null", ""):
        return None
    try:
        return int(t)
    except ValueError:
        pass
    try:
        return float(t)
    except ValueError:
        return t


def parse_config_text(text: str) -> dict:
    """Flat ``section.key = value`` lines to a ``{"section.key": raw string}`` dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _flatten(data: Mapping) -> dict:
    flat = {}
    for key, value in data.items():
        if isinstance(value, Mapping):
            for sub, v in value.items():
                flat[f"{key}.{sub}"] = v
        else:
            flat[key] = value
    return flat


_LIST_KEYS = {"run.monitors", "extract.eps", "witness.window"}
_INT_KEYS = {"params.N", "grid.M", "run.seed", "run.record_every", "picard.iters"}
_STR_KEYS = {"init.kind", "init.file", "run.frame"}


def _coerce(key: str, value):
    if key in _LIST_KEYS:
        if isinstance(value, str):
            items = [v for v in (p.strip() for p in value.split(",")) if v]
        elif value is None:
            items = []
        else:
            items = list(value)
        if key == "run.monitors":
            return tuple(str(v) for v in items)
        return tuple(float(v) for v in items)
    if isinstance(value, str):
        if value.strip().lower() in ("none", "null", ""):
            return None
        if key not in _STR_KEYS:
            value = _parse_scalar(value)
    if value is None:
        return None
    if key in _STR_KEYS:
        return str(value)
    if key in _INT_KEYS:
        if float(value) != int(float(value)):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(float(value))
    if isinstance(value, str):
        raise ConfigError(f"{key} must be numeric, got {value!r}")
    return float(value)


def config_from_dict(data: Mapping) -> RunConfig:
    """Build a RunConfig from flat dotted keys or a dict nested by section."""
    flat = _flatten(data)
    kwargs: dict[str, Any] = {}
    pkw: dict[str, Any] = {}
    for key, value in flat.items():
        section, _, name = key.partition(".")
        if section not in _SCHEMA or name not in _SCHEMA[section]:
            raise ConfigError(f"unknown configuration key {key!r}")
        value = _coerce(key, value)
        if value is None:
            continue
        if section == "params":
            pkw[name] = value
        else:
            kwargs[_SCHEMA[section][name]] = value
    if "N" not in pkw or "lambda1" not in pkw:
        raise ConfigError("params.N and params.lambda1 are required")
    try:
        params = ModelParams(**pkw)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(params=params, **kwargs)


def load_config(path: str | Path, overrides: Optional[Mapping] = None) -> RunConfig:
    """Read a key=value or JSON configuration file.

    A relative ``init.file`` is resolved against the configuration's directory.
    """
    path = Path(path)
    text = path.read_text()
    if path.suffix == ".json" or text.lstrip().startswith("{"):
        try:
            data = _flatten(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    else:
        data = parse_config_text(text)
    data.update(overrides or {})
    f = data.get("init.file")
    if isinstance(f, str):
        f = _parse_scalar(f)
    if f and not Path(str(f)).is_absolute():
        data["init.file"] = str((path.parent / str(f)).resolve())
    return config_from_dict(data)


def initial_datum(config: RunConfig) -> RadialField:
    grid = make_grid(config.R, config.M, config.params.N)
    if config.init_kind == "gaussian":
        return gaussian(grid, config.amplitude, config.width)
    if config.init_kind == "random":
        f = random_field(grid, np.random.default_rng(config.seed))
        return f * (config.amplitude / norm_l2(f))
    f = from_csv(Path(config.init_file).read_text())
    if f.grid.N != grid.N:
        raise ConfigError(f"datum file is for N={f.grid.N}, configuration has N={grid.N}")
    return f if f.grid == grid else resample(f, grid)


@contextlib.contextmanager
def _stage(module: str):
    """Prefix solver failures with the module where they arose."""
    try:
        yield
    except SolverError as exc:
        raise type(exc)(f"[{module}] {exc}") from exc


def _verdict(params: ModelParams, stats: DataStats) -> dict:
    if params.lambda1 == 0:
        return {"tag": None, "source": None, "threshold_margin": None,
                "note": "free flow (lambda1 = 0) is not classified"}
    CN = None
    if params.lambda1 > 0 and params.lambda2 < 0:
        with _stage("ground_state"):
            CN = ground_state(params.N).CN
    return classify(params, stats, CN).to_dict()


@dataclass
class _FrameRun:
    records: list
    kept: list
    final_state: Any
    monitors: dict = field(default_factory=dict)
    extra_files: dict = field(default_factory=dict)


def _decay_result(times, fields_lr: dict, N: int) -> dict:
    out = {}
    for r, norms in fields_lr.items():
        key = f"r{r:g}"
        try:
            fit = decay_fit(times, norms, r, N)
            out[key] = {"slope": fit.slope, "theory": fit.theory,
                        "relative_error": fit.relative_error, "window": list(fit.window)}
        except LabError as exc:
            out[key] = {"error": str(exc)}
    return out


def _series_csv(header: Sequence[str], rows: Iterable[Sequence[float]]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(f"{x:.15e}" for x in row) + "\n")
    return buf.getvalue()


def _run_physical(config: RunConfig, phi: RadialField) -> _FrameRun:
    params, cfg = config.params, config.stepper
    T = config.physical_end
    e0 = energy(phi, params)
    records, kept, decay_rows = [], [], []
    n_steps = max(1, int(round(T / cfg.dt)))
    u = phi
    with _stage("propagators"):
        for k, (t, u) in enumerate(iter_physical(phi, params, cfg, T)):
            if k % config.record_every == 0 or k == n_steps:
                rec = physical_record(t, u, params, e0)
                records.append(rec)
                kept.append(rec)
                if "decay" in config.monitors:
                    decay_rows.append([t] + [lp_integral(u, r - 2) ** (1 / r) for r in DECAY_ORDERS])
    run = _FrameRun(records, kept, (T, u))
    if "decay" in config.monitors:
        arr = np.array(decay_rows)
        run.monitors["decay"] = _decay_result(
            arr[:, 0], {r: arr[:, i + 1] for i, r in enumerate(DECAY_ORDERS)}, params.N)
        run.extra_files["decay_physical.csv"] = _series_csv(
            ["t"] + [f"L{r:g}" for r in DECAY_ORDERS], decay_rows)
    if "picard" in config.monitors:
        with _stage("propagators"):
            its = list(picard_iterates(phi, params, T, config.picard_iters, cfg))
        ref = norm_l2(u)
        scale = ref if ref > 0 else 1.0
        run.monitors["picard"] = {
            "iters": config.picard_iters,
            "cauchy_diffs": [norm_l2(b - a) / scale for a, b in zip(its, its[1:])],
            "stepper_agreement": norm_l2(its[-1] - u) / scale,
        }
    return run


def _run_lens(config: RunConfig, phi: RadialField) -> _FrameRun:
    params, cfg = config.params, config.stepper
    s_end = config.lens_end
    if config.frame == "both":
        lens_grid = phi.grid.scaled(1.0 / (1.0 + config.physical_end))
        start = to_lens(phi, 0.0, lens_grid)
    else:
        start = to_lens(phi, 0.0)
    stops = set(config.extract_stops) if "extract" in config.monitors else set()
    want_decay = "decay" in config.monitors
    want_witness = "witness" in config.monitors
    theta = bump(start.v.grid, config.witness_r0) if want_witness else None
    N = params.N

    rec = ledger_start(start, params)
    records, kept = [rec], [rec]
    decay_rows, witness_s, witness_v, extract_states = [], [], [], []

    def observe(state: LensState, keep: bool):
        if want_witness:
            witness_s.append(state.s)
            witness_v.append(pairing(state.v, theta))
        if keep and want_decay:
            s = state.s
            row = [physical_time(s)]
            for r in DECAY_ORDERS:
                row.append(((1 - s) ** (N * (r - 2) / 2) * lp_integral(state.v, r - 2)) ** (1 / r))
            decay_rows.append(row)

    observe(start, True)
    state = start
    with _stage("propagators"):
        for k, state in enumerate(iter_lens(start, params, cfg, s_end, stops=sorted(stops)), 0):
            if k == 0:
                continue
            rec = ledger_update(rec, state, params)
            records.append(rec)
            hit_stop = any(abs(state.s - x) <= 1e-13 for x in stops)
            keep = k % config.record_every == 0 or hit_stop or state.s == s_end
            if keep:
                kept.append(rec)
            if hit_stop:
                extract_states.append(state)
            observe(state, keep)
    run = _FrameRun(records, kept, state)

    if want_decay:
        arr = np.array(decay_rows)
        run.monitors["decay"] = _decay_result(
            arr[:, 0], {r: arr[:, i + 1] for i, r in enumerate(DECAY_ORDERS)}, N)
        run.extra_files["decay_lens.csv"] = _series_csv(
            ["t"] + [f"L{r:g}" for r in DECAY_ORDERS], decay_rows)
    if "gronwall" in config.monitors:
        fit = gronwall_exponent_check(records, params)
        run.monitors["gronwall"] = {"slope": fit.slope, "bound": fit.bound,
                                    "window": list(fit.window), "skipped": fit.skipped,
                                    "within_bound": fit.within_bound, "reason": fit.reason}
    if want_witness:
        s_arr, v_arr = np.array(witness_s), np.array(witness_v)
        res: dict = {"r0": config.witness_r0, "window": list(config.witness_window)}
        try:
            res["drift"] = pairing_drift(s_arr, v_arr, config.witness_window)
        except LabError as exc:
            res["drift_error"] = str(exc)
        if params.p1 <= 2.0 / N * (1 + 1e-12):
            try:
                w = witness_from_series(s_arr, v_arr, params, config.witness_window)
                res.update(growth_ratio=w.growth_ratio, exponent=w.exponent,
                           predicted=w.predicted, model=w.model)
            except LabError as exc:
                res["error"] = str(exc)
        run.monitors["witness"] = res
        run.extra_files["witness.csv"] = _series_csv(
            ["s", "re", "im", "abs"],
            ([s, v.real, v.imag, abs(v)] for s, v in zip(s_arr, v_arr)))
    if "extract" in config.monitors:
        uniq = {st.s: st for st in extract_states}
        u_plus, report = extract_scattering_state(list(uniq.values()))
        run.monitors["extract"] = {"rows": report.records(), "decreasing": report.decreasing}
        run.extra_files["scattering_state.csv"] = to_csv(u_plus)
    return run


def _versions() -> dict:
    return {"nlslab": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


@dataclass
class RunRecord:
    run_id: str
    directory: Path
    config: dict
    ledger: dict
    verdict: dict
    initial: dict
    monitors: dict
    extraction: Optional[dict]
    frame_equivalence: Optional[dict]
    final: dict
    wall_clock_s: float
    version: dict

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["directory"] = str(self.directory)
        return d


def run(config: RunConfig, out_root: str | Path = "runs") -> RunRecord:
    """Execute the configured frame(s) and persist ledger CSV(s) plus record.json."""
    t_start = time.perf_counter()
    rid = config.run_id()
    out = Path(out_root) / rid
    out.mkdir(parents=True, exist_ok=True)
    params = config.params
    phi = initial_datum(config)
    stats = DataStats(norm_l2(phi), energy(phi, params), norm_sigma(phi))
    verdict = _verdict(params, stats)

    files: dict[str, str] = {"config.txt": config.to_text()}
    ledger, monitors, final = {}, {}, {}
    phys = lens = None
    if config.frame in ("physical", "both"):
        phys = _run_physical(config, phi)
        ledger["physical"] = "ledger_physical.csv"
        files["ledger_physical.csv"] = ledger_csv(phys.kept)
        files.update(phys.extra_files)
        monitors["physical"] = phys.monitors
        T, u = phys.final_state
        files["final_physical.csv"] = to_csv(u)
        final["physical"] = {"t": T, "mass": norm_l2(u), "energy": energy(u, params)}
    if config.frame in ("lens", "both"):
        lens = _run_lens(config, phi)
        ledger["lens"] = "ledger_lens.csv"
        files["ledger_lens.csv"] = ledger_csv(lens.kept)
        files.update(lens.extra_files)
        monitors["lens"] = lens.monitors
        last: LedgerRecord = lens.records[-1]
        files["final_lens.csv"] = to_csv(lens.final_state.v)
        final["lens"] = {"s": last.s, "mass": last.mass, "energy": last.energy,
                         "grad_l2": last.grad_l2,
                         "grad_l2_max_ratio": _max_ratio([r.grad_l2 for r in lens.records]),
                         "identity_residual_max": max(r.identity_residual for r in lens.records)}

    equivalence = None
    if phys is not None and lens is not None:
        T, u = phys.final_state
        mapped = to_lens(u, T)
        direct = lens.final_state.v
        ref = norm_l2(mapped.v)
        diff = norm_l2(direct - mapped.v)
        ident = check_identities(u, T, mapped, params)
        equivalence = {"t": T, "s": mapped.s,
                       "relative_l2": diff / ref if ref > 0 else diff,
                       "identity_worst": ident.worst,
                       "identity_gradient_v": ident.gradient_v,
                       "identity_gradient_u": ident.gradient_u}

    extraction = (monitors.get("lens") or {}).get("extract")
    for name, text in files.items():
        (out / name).write_text(text)
    record = RunRecord(
        run_id=rid, directory=out, config=config.to_dict(), ledger=ledger, verdict=verdict,
        initial={"mass": stats.mass, "energy": stats.energy, "sigma_norm": stats.sigma_norm},
        monitors=monitors, extraction=extraction, frame_equivalence=equivalence, final=final,
        wall_clock_s=time.perf_counter() - t_start, version=_versions())
    (out / "record.json").write_text(json.dumps(record.to_dict(), indent=2, sort_keys=True) + "\n")
    return record


def _max_ratio(values: Sequence[float]) -> Optional[float]:
    return max(values) / values[0] if values and values[0] > 0 else None


# ---------------------------------------------------------------- sweeps

SUMMARY_FIELDS = ("run_id", "status", "tag", "source", "threshold_margin",
                  "decay_r4", "decay_r6", "gronwall_slope", "witness_exponent",
                  "witness_ratio", "frame_residual", "error")


def expand_axes(axes: Mapping[str, Sequence]) -> list[dict]:
    """Cartesian product of axis values, first axis varying slowest."""
    keys = list(axes)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(axes[k] for k in keys))]


def _summary_row(record: Mapping) -> dict:
    mons = record.get("monitors", {})
    lensm = mons.get("lens", {})
    decay = lensm.get("decay") or mons.get("physical", {}).get("decay") or {}
    verdict = record.get("verdict") or {}
    eq = record.get("frame_equivalence") or {}
    return {
        "run_id": record["run_id"],
        "tag": verdict.get("tag"),
        "source": verdict.get("source"),
        "threshold_margin": verdict.get("threshold_margin"),
        "decay_r4": decay.get("r4", {}).get("slope"),
        "decay_r6": decay.get("r6", {}).get("slope"),
        "gronwall_slope": lensm.get("gronwall", {}).get("slope"),
        "witness_exponent": lensm.get("witness", {}).get("exponent"),
        "witness_ratio": lensm.get("witness", {}).get("growth_ratio"),
        "frame_residual": eq.get("relative_l2"),
    }


def _sweep_point(base: dict, overrides: dict, out_root: str) -> dict:
    row = {"status": "error", "run_id": None, "error": None}
    try:
        data = dict(base)
        data.update(overrides)
        config = config_from_dict(data)
        rid = config.run_id()
        rec_path = Path(out_root) / rid / "record.json"
        if rec_path.exists():
            row.update(_summary_row(json.loads(rec_path.read_text())), status="cached")
        else:
            record = run(config, out_root)
            row.update(_summary_row(record.to_dict()), status="ok")
    except Exception as exc:  # noqa: BLE001 - a failing point must not stop the sweep
        log.warning("sweep point %s failed: %s", overrides, exc)
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


@dataclass
class SweepReport:
    path: Path
    rows: list

    @property
    def failures(self) -> int:
        return sum(1 for r in self.rows if r["status"] == "error")


def sweep(base: RunConfig | Mapping, axes: Mapping[str, Sequence], out_root: str | Path = "runs",
          jobs: int = 1) -> SweepReport:
    """Run every lattice point; finished points (record.json present) are reused.

    Writes ``sweep-<hash>.csv`` in ``out_root`` with one row per point.
    Points that fail to configure or run get status ``error``.
    """
    base_flat = _flatten(base.to_dict() if isinstance(base, RunConfig) else base)
    for key in axes:
        section, _, name = key.partition(".")
        if section not in _SCHEMA or name not in _SCHEMA[section]:
            raise ConfigError(f"unknown sweep axis {key!r}")
    points = expand_axes(axes)
    if not points:
        raise ConfigError("empty sweep lattice")
    out_root = Path(out_root)
    out_root.mkdir(parents=True, exist_ok=True)
    if jobs <= 1:
        rows = [_sweep_point(base_flat, p, str(out_root)) for p in points]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, itertools.repeat(base_flat),
                                 points, itertools.repeat(str(out_root))))
    rows = [{**p, **r} for p, r in zip(points, rows)]
    tag = hashlib.sha256(json.dumps([base_flat, {k: list(v) for k, v in axes.items()}],
                                    sort_keys=True, default=str).encode()).hexdigest()[:12]
    path = out_root / f"sweep-{tag}.csv"
    header = list(axes) + list(SUMMARY_FIELDS)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=header, extrasaction="ignore")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in header})
    return SweepReport(path, rows)


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value
