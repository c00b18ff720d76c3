"""Experiment configs, result tables and dispatch to the numerical modules."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .approx import bc_sweep, borel_caratheodory_check
from .errors import ConfigInvalid, NoConvergence
from .linalg import as_matrix
from .matfun import power_sequence
from .opzoo import (
    collective_tail_diagnostic,
    example2_oscillation,
    get_generator,
    truncate,
    uniform_power_bound_study,
)
from .riesz import riesz_origin_disc, riesz_projection
from .spectra import nayak_limit, v_estimate_many, yamamoto_table

EXPERIMENTS = (
    "power-seq",
    "yamamoto",
    "nayak-limit",
    "riesz",
    "v-estimate",
    "truncate-study",
    "tail-diagnostic",
    "example2",
    "bc-check",
)
FORMATS = ("csv", "records")
META_PREFIX = "#meta "

DEFAULT_TOLERANCES = {
    "tol_cauchy": 1e-10,
    "tol_riesz": 1e-8,
}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    operator: dict | None
    schedule: dict
    tolerances: dict
    seed: int
    output: dict
    params: dict = field(default_factory=dict)

    def semantic(self) -> dict:
        """Every field that influences the numbers (the output location does not)."""
        return {
            "experiment": self.experiment,
            "operator": self.operator,
            "schedule": self.schedule,
            "tolerances": self.tolerances,
            "seed": self.seed,
            "params": self.params,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _parse_entry(value, path: str) -> complex:
    if isinstance(value, bool):
        raise ConfigInvalid(path, "booleans are not matrix entries")
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        try:
            return complex(value.replace(" ", ""))
        except ValueError:
            raise ConfigInvalid(path, f"cannot parse {value!r} as a complex number") from None
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigInvalid(path, f"unsupported entry {value!r}")


def _canonical_entry(z: complex):
    return z.real if z.imag == 0 else [z.real, z.imag]


def _parse_operator(raw, path: str = "operator") -> dict | None:
    if raw is None:
        return None
    if not isinstance(raw, dict):
        raise ConfigInvalid(path, "must be an object with 'matrix' or 'zoo'")
    if ("matrix" in raw) == ("zoo" in raw):
        raise ConfigInvalid(path, "give exactly one of 'matrix' and 'zoo'")
    if "matrix" in raw:
        rows = raw["matrix"]
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            raise ConfigInvalid(f"{path}.matrix", "must be a non-empty list of rows")
        width = len(rows[0])
        if any(len(r) != width for r in rows) or width != len(rows):
            raise ConfigInvalid(f"{path}.matrix", "must be square")
        parsed = [[_canonical_entry(_parse_entry(v, f"{path}.matrix[{i}][{j}]")) for j, v in enumerate(r)] for i, r in enumerate(rows)]
        return {"matrix": parsed}
    zoo = raw["zoo"]
    if not isinstance(zoo, dict) or "name" not in zoo:
        raise ConfigInvalid(f"{path}.zoo", "needs 'name'")
    m = zoo.get("m")
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ConfigInvalid(f"{path}.zoo.m", "truncation size must be a positive integer")
    params = zoo.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid(f"{path}.zoo.params", "must be an object")
    try:
        get_generator(zoo["name"], params)
    except KeyError as exc:
        raise ConfigInvalid(f"{path}.zoo.name", str(exc.args[0])) from None
    except TypeError as exc:
        raise ConfigInvalid(f"{path}.zoo.params", str(exc)) from None
    return {"zoo": {"name": zoo["name"], "params": params, "m": m}}


def _positive_int(value, path: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigInvalid(path, "must be a positive integer")
    return value


def _parse_schedule(raw, path: str = "schedule") -> dict:
    if not isinstance(raw, dict) or not raw:
        raise ConfigInvalid(path, "must be a non-empty object")
    if "n_list" in raw:
        ns = raw["n_list"]
        if not isinstance(ns, list) or not ns:
            raise ConfigInvalid(f"{path}.n_list", "must be a non-empty list")
        ns = [_positive_int(n, f"{path}.n_list[{i}]") for i, n in enumerate(ns)]
        return {"n_list": sorted(set(ns))}
    if "n_lo" in raw or "n_hi" in raw:
        lo = _positive_int(raw.get("n_lo"), f"{path}.n_lo")
        hi = _positive_int(raw.get("n_hi"), f"{path}.n_hi")
        if hi < lo:
            raise ConfigInvalid(f"{path}.n_hi", "must be >= n_lo")
        return {"n_lo": lo, "n_hi": hi}
    if "n_max" in raw:
        n_max = _positive_int(raw["n_max"], f"{path}.n_max")
        if n_max & (n_max - 1):
            raise ConfigInvalid(f"{path}.n_max", "doubling schedules need a power of two")
        return {"n_max": n_max}
    raise ConfigInvalid(path, "needs n_list, n_lo/n_hi or n_max")


def parse_config(raw: Any) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigInvalid("$", "config must be a JSON object")
    known = {"experiment", "operator", "schedule", "tolerances", "seed", "output", "params"}
    extra = set(raw) - known
    if extra:
        raise ConfigInvalid(sorted(extra)[0], "unknown field")
    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        raise ConfigInvalid("experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    operator = _parse_operator(raw.get("operator"))
    if operator is None and exp not in ("bc-check",):
        raise ConfigInvalid("operator", "required for this experiment")
    if exp in ("truncate-study", "tail-diagnostic", "example2") and (operator is None or "zoo" not in operator):
        raise ConfigInvalid("operator", f"{exp} needs a zoo reference")
    schedule = _parse_schedule(raw.get("schedule", {"n_list": [1]}))
    tol_raw = raw.get("tolerances", {})
    if not isinstance(tol_raw, dict):
        raise ConfigInvalid("tolerances", "must be an object")
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, val in tol_raw.items():
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not val > 0:
            raise ConfigInvalid(f"tolerances.{key}", "must be a positive number")
        tolerances[key] = float(val)
    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise ConfigInvalid("seed", "must be an unsigned integer")
    output = raw.get("output", {})
    if not isinstance(output, dict):
        raise ConfigInvalid("output", "must be an object")
    fmt = output.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigInvalid("output.format", f"must be one of {FORMATS}")
    params = raw.get("params", {})
    if not isinstance(params, dict):
        raise ConfigInvalid("params", "must be an object")
    return ExperimentConfig(exp, operator, schedule, tolerances, seed, {"path": output.get("path"), "format": fmt}, params)


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigInvalid("$", f"invalid JSON: {exc}") from None
    return parse_config(raw)


# ---- result tables --------------------------------------------------------


@dataclass
class ResultTable:
    """Rows of floats, ints and strings plus metadata.

    ``plot`` names the columns used as ``(x, y, series)`` by the records
    format.
    """

    header: list[str]
    rows: list[list]
    metadata: dict
    plot: tuple[str, str, str | None] = ("x", "y", None)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(f"row {row!r} does not match header {self.header!r}")

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]


def _cell_type(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "int"
    if isinstance(v, (int, np.integer)):
        return "int"
    if isinstance(v, (float, np.floating)):
        return "float"
    return "str"


def _column_types(table: ResultTable) -> list[str]:
    types = []
    for i in range(len(table.header)):
        kinds = {_cell_type(r[i]) for r in table.rows}
        types.append("str" if "str" in kinds else "float" if "float" in kinds else "int")
    return types


def _format_cell(v, kind: str) -> str:
    if kind == "float":
        return format(float(v), ".17g")
    if kind == "int":
        return str(int(v))
    return str(v)


def _parse_cell(text: str, kind: str):
    if kind == "float":
        return float(text)
    if kind == "int":
        return int(text)
    return text


def _json_value(v, kind: str):
    if kind == "float":
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if kind == "int":
        return int(v)
    return str(v)


def dumps_table(table: ResultTable, fmt: str = "csv") -> str:
    types = _column_types(table)
    meta = {**table.metadata, "columns": table.header, "types": types, "plot": list(table.plot)}
    buf = io.StringIO()
    if fmt == "csv":
        buf.write(META_PREFIX + json.dumps(meta, sort_keys=True) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.header)
        for row in table.rows:
            writer.writerow([_format_cell(v, k) for v, k in zip(row, types)])
    elif fmt == "records":
        buf.write(json.dumps({"meta": meta}, sort_keys=True) + "\n")
        x, y, series = table.plot
        for row in table.rows:
            rec = {h: _json_value(v, k) for h, v, k in zip(table.header, row, types)}
            line = {"x": rec.get(x), "y": rec.get(y), "series": rec.get(series) if series else None, "row": rec}
            buf.write(json.dumps(line, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format {fmt!r}")
    return buf.getvalue()


def loads_table(text: str) -> ResultTable:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty table")
    if lines[0].startswith(META_PREFIX):
        meta = json.loads(lines[0][len(META_PREFIX) :])
        types = meta.pop("types")
        header = meta.pop("columns")
        plot = tuple(meta.pop("plot"))
        reader = csv.reader(lines[1:])
        file_header = next(reader)
        if file_header != header:
            raise ValueError("header does not match metadata")
        rows = [[_parse_cell(c, k) for c, k in zip(r, types)] for r in reader]
        return ResultTable(header, rows, meta, plot)
    first = json.loads(lines[0])
    meta = first["meta"]
    types = meta.pop("types")
    header = meta.pop("columns")
    plot = tuple(meta.pop("plot"))
    rows = []
    for line in lines[1:]:
        rec = json.loads(line)["row"]
        rows.append([float(rec[h]) if k == "float" else rec[h] for h, k in zip(header, types)])
    return ResultTable(header, rows, meta, plot)


# ---- dispatch -------------------------------------------------------------


def _operator_matrix(cfg: ExperimentConfig) -> np.ndarray:
    op = cfg.operator
    if "matrix" in op:
        return as_matrix([[_parse_entry(v, "operator.matrix") for v in r] for r in op["matrix"]])
    z = op["zoo"]
    return truncate(get_generator(z["name"], z["params"]), z["m"])


def _ns(schedule: dict) -> list[int]:
    if "n_list" in schedule:
        return list(schedule["n_list"])
    if "n_lo" in schedule:
        return list(range(schedule["n_lo"], schedule["n_hi"] + 1))
    return [1 << k for k in range(schedule["n_max"].bit_length())]


def _run_power_seq(cfg, a):
    rows = []
    for rec in power_sequence(a, _ns(cfg.schedule), method=cfg.params.get("method", "graded")):
        for j, val in enumerate(rec.eigenvalues, start=1):
            rows.append([rec.n, j, float(val), rec.delta_prev, rec.effective_rank])
    return ResultTable(["n", "j", "eigenvalue", "delta_prev", "effective_rank"], rows, {}, ("n", "eigenvalue", "j")), {}


def _run_yamamoto(cfg, a):
    rows = [[r.n, r.j, r.root, r.modulus, r.error, int(r.resolved)] for r in yamamoto_table(a, _ns(cfg.schedule))]
    return ResultTable(["n", "j", "root", "modulus", "error", "resolved"], rows, {}, ("n", "error", "j")), {}


def _run_nayak(cfg, a):
    n_max = cfg.schedule.get("n_max", max(_ns(cfg.schedule)))
    if n_max & (n_max - 1):
        n_max = 1 << n_max.bit_length()
    est = nayak_limit(a, n_max, cfg.tolerances["tol_cauchy"])
    rows = [[j, m.predicted, m.achieved, m.error] for j, m in enumerate(est.spectrum_match, start=1)]
    info = {
        "cauchy_gap": est.cauchy_gap,
        "converged": est.converged,
        "n_final": est.n_final,
        "multiplicity_ok": est.multiplicity_ok,
    }
    flags = {} if est.converged else {"flag": "not converged"}
    return ResultTable(["j", "modulus", "eigenvalue", "error"], rows, info, ("j", "error", None)), flags


def _run_riesz(cfg, a):
    p = cfg.params
    radius = p.get("radius")
    if not isinstance(radius, (int, float)) or not radius > 0:
        raise ConfigInvalid("params.radius", "positive radius required")
    nodes = int(p.get("nodes", 256))
    if "center" in p:
        center = _parse_entry(p["center"], "params.center")
        res = riesz_projection(a, center, float(radius), nodes, cfg.tolerances["tol_riesz"])
    else:
        res = riesz_origin_disc(a, float(radius), nodes, seed=cfg.seed)
    rows = [[res.rank, res.quad_nodes, res.idempotency_residual, res.commutation_residual, res.refinement_change]]
    info = {"decay_values": list(res.decay_values)}
    return ResultTable(["rank", "quad_nodes", "idempotency_residual", "commutation_residual", "refinement_change"], rows, info, ("rank", "idempotency_residual", None)), {}


def _run_v_estimate(cfg, a):
    if "n_lo" not in cfg.schedule:
        raise ConfigInvalid("schedule", "v-estimate needs n_lo/n_hi")
    lo, hi = cfg.schedule["n_lo"], cfg.schedule["n_hi"]
    if hi <= lo:
        raise ConfigInvalid("schedule.n_hi", "must exceed n_lo")
    raw = cfg.params.get("vectors")
    if raw is None:
        xs = np.eye(a.shape[0], dtype=complex)
    else:
        xs = np.array([[_parse_entry(v, "params.vectors") for v in vec] for vec in raw], dtype=complex).T
        if xs.shape[0] != a.shape[0]:
            raise ConfigInvalid("params.vectors", "vector length must match the matrix size")
    rows = [[k, est.r_hat] for k, est in enumerate(v_estimate_many(a, xs, lo, hi), start=1)]
    return ResultTable(["vector", "r_hat"], rows, {}, ("vector", "r_hat", None)), {}


def _zoo_gen(cfg):
    z = cfg.operator["zoo"]
    return get_generator(z["name"], z["params"]), z["m"]


def _run_truncate_study(cfg, _a):
    gen, m = _zoo_gen(cfg)
    M = int(cfg.params.get("M", 4 * m))
    study = uniform_power_bound_study(gen, m, M, _ns(cfg.schedule), counterexample=bool(cfg.params.get("counterexample", False)))
    rows = [[n, d, study.bound_value] for n, d in zip(study.n_grid, study.diffs)]
    info = {"sup_diff": study.sup_diff, "bound_value": study.bound_value, "holds": study.holds, "M": M}
    return ResultTable(["n", "diff", "bound"], rows, info, ("n", "diff", None)), {}


def _run_tail(cfg, _a):
    gen, m = _zoo_gen(cfg)
    n_max = max(_ns(cfg.schedule))
    k_grid = cfg.params.get("k_grid", list(range(0, m + 1, max(1, m // 8))))
    rows = [[r.k, r.tau] for r in collective_tail_diagnostic(gen, m, n_max, k_grid)]
    return ResultTable(["k", "tau"], rows, {"n_max": n_max}, ("k", "tau", None)), {}


def _run_example2(cfg, _a):
    _, m = _zoo_gen(cfg)
    rows = [[r.p, r.value, r.expected, r.error, r.kind] for r in example2_oscillation(m, _ns(cfg.schedule))]
    return ResultTable(["p", "value", "expected", "error", "kind"], rows, {}, ("p", "value", "kind")), {}


def _run_bc(cfg, _a):
    p = cfg.params
    grid = int(p.get("grid", 256))
    if "coefficients" in p:
        coef = [_parse_entry(c, "params.coefficients") for c in p["coefficients"]]
        res = borel_caratheodory_check(coef, float(p.get("r", 1.0)), float(p.get("R", 2.0)), grid)
        rows = [[1, res.lhs, res.rhs, int(res.holds)]]
    else:
        trials = int(p.get("trials", 100))
        rows = [[i, r.lhs, r.rhs, int(r.holds)] for i, (_, _, _, r) in enumerate(bc_sweep(trials, cfg.seed, grid=grid), start=1)]
    info = {"violations": sum(1 - r[3] for r in rows)}
    return ResultTable(["trial", "lhs", "rhs", "holds"], rows, info, ("trial", "lhs", None)), {}


_DISPATCH = {
    "power-seq": _run_power_seq,
    "yamamoto": _run_yamamoto,
    "nayak-limit": _run_nayak,
    "riesz": _run_riesz,
    "v-estimate": _run_v_estimate,
    "truncate-study": _run_truncate_study,
    "tail-diagnostic": _run_tail,
    "example2": _run_example2,
    "bc-check": _run_bc,
}


@dataclass
class RunOutcome:
    table: ResultTable
    status: str  # "ok", "flagged" or "error"
    message: str = ""


def run(cfg: ExperimentConfig) -> RunOutcome:
    """Run one experiment.  Non-convergence yields a flagged (possibly empty) table instead of raising."""
    start = time.perf_counter()
    a = _operator_matrix(cfg) if cfg.operator is not None else None
    base = {"config_hash": cfg.config_hash(), "version": __version__, "experiment": cfg.experiment, "seed": cfg.seed}
    try:
        table, flags = _DISPATCH[cfg.experiment](cfg, a)
        status, message = ("flagged", flags["flag"]) if flags else ("ok", "")
    except NoConvergence as exc:
        table = ResultTable(["error"], [], {})
        status, message = "flagged", f"{type(exc).__name__}: {exc}"
    table.metadata = {**base, **table.metadata, "status": status, "wall_time": time.perf_counter() - start}
    if message:
        table.metadata["message"] = message
    return RunOutcome(table, status, message)
