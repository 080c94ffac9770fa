"""Experiment configuration, runner, parameter sweeps and result emission."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from dftbeam.approx import approx_rate
from dftbeam.channel import LosModel, RiceanParams, db_to_linear, gen_los
from dftbeam.codebook import BeamSelection, analog_beamformer, build_dft
from dftbeam.linkrates import (
    LinkPowers,
    McConfig,
    draw_effective,
    exact_from_drops,
    expected_geq_power,
)
from dftbeam.schemes import DL_MRT_LT, scheme_for
from dftbeam.selection import DEFAULT_BUDGET, SELECTORS, SelectionContext, select

CSV_FIELDS = (
    "snr_db",
    "k_db",
    "scheme",
    "selection",
    "user",
    "rate_exact",
    "rate_approx",
    "mc_stderr",
    "comparisons",
    "discarded_drops",
)
SUM_ROW = -1
SWEEP_AXES = ("snr", "k_db", "margin_n")


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending key."""

    def __init__(self, field: str, message: str):
        super().__init__(f"invalid config field {field!r}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExperimentConfig:
    M: int = 64
    N_s: int = 16
    N_u: int = 4
    k_db: float | tuple[float, ...] = 10.0
    betas: float | tuple[float, ...] = 1.0
    snr_db_grid: tuple[float, ...] = (-10.0, 0.0, 10.0, 20.0)
    link: str = "uplink"
    beamformer: str = "zf"
    normalization: str | None = None
    selection: str = "two_step"
    margin_n: int = 1
    los_model: str = "gaussian"
    drops: int = 1000
    seed: int = 0
    selection_snr_db: float = 10.0
    budget: int = DEFAULT_BUDGET
    output: str | None = None
    format: str = "csv"

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown key")
        kwargs = dict(data)
        for key in ("k_db", "betas"):
            if isinstance(kwargs.get(key), list):
                kwargs[key] = tuple(kwargs[key])
        if "snr_db_grid" in kwargs:
            grid = kwargs["snr_db_grid"]
            if not isinstance(grid, (list, tuple)):
                grid = [grid]
            kwargs["snr_db_grid"] = tuple(grid)
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError("<file>", f"config file {path} does not exist") from None
        except json.JSONDecodeError as exc:
            raise ConfigError("<file>", f"{path} is not valid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise ConfigError("<file>", "config must be a flat JSON object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "ExperimentConfig":
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    # -------------------------------------------------------------- checks
    def _per_user(self, name: str, value) -> np.ndarray:
        arr = np.atleast_1d(np.asarray(value, dtype=float))
        if arr.shape == (1,):
            arr = np.full(self.N_u, arr[0])
        if arr.shape != (self.N_u,):
            raise ConfigError(name, f"expected a scalar or {self.N_u} values, got {len(arr)}")
        return arr

    @property
    def scheme(self) -> str:
        return scheme_for(self.link, self.beamformer, self.normalization)

    def validate(self) -> None:
        for name in ("M", "N_s", "N_u", "drops", "margin_n", "budget"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
                raise ConfigError(name, f"must be a positive integer, got {value!r}")
        if not (self.N_u <= self.N_s <= self.M):
            raise ConfigError("N_s", f"need N_u <= N_s <= M, got {self.N_u}, {self.N_s}, {self.M}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ConfigError("seed", f"must be a non-negative integer, got {self.seed!r}")
        if self.link not in ("uplink", "downlink"):
            raise ConfigError("link", f"must be uplink or downlink, got {self.link!r}")
        if self.link == "uplink":
            if self.beamformer not in ("zf", "mrc"):
                raise ConfigError("beamformer", f"uplink supports zf or mrc, got {self.beamformer!r}")
            if self.normalization is not None:
                raise ConfigError("normalization", "only meaningful for the downlink")
        else:
            if self.beamformer not in ("zf", "mrt"):
                raise ConfigError("beamformer", f"downlink supports zf or mrt, got {self.beamformer!r}")
            if self.normalization not in ("long", "short"):
                raise ConfigError("normalization", f"downlink needs long or short, got {self.normalization!r}")
            if self.beamformer == "zf" and self.normalization == "long" and self.N_s <= self.N_u:
                raise ConfigError("N_s", "long-term ZF normalization needs N_s > N_u")
        kdb = self._per_user("k_db", self.k_db)
        if not np.all(np.isfinite(kdb)):
            raise ConfigError("k_db", "Ricean factors must be finite")
        betas = self._per_user("betas", self.betas)
        if np.any(~np.isfinite(betas)) or np.any(betas <= 0):
            raise ConfigError("betas", "large-scale gains must be positive")
        if len(self.snr_db_grid) == 0:
            raise ConfigError("snr_db_grid", "must contain at least one SNR")
        if not all(isinstance(s, (int, float)) and math.isfinite(s) for s in self.snr_db_grid):
            raise ConfigError("snr_db_grid", "SNR values must be finite numbers")
        self.fixed_indices()
        if self.selection == "two_step":
            L = self.N_u * (self.N_s // self.N_u + self.margin_n)
            if L > self.M:
                raise ConfigError("margin_n", f"N_u (C + n) = {L} exceeds M = {self.M}; shrink n")
        elif self.selection == "exhaustive":
            n_candidates = math.comb(self.M, self.N_s)
            if n_candidates > self.budget:
                raise ConfigError(
                    "selection",
                    f"exhaustive search needs {n_candidates} candidates, budget is {self.budget}",
                )
        self.los()
        if self.format not in ("csv", "json"):
            raise ConfigError("format", f"must be csv or json, got {self.format!r}")

    def fixed_indices(self) -> tuple[int, ...] | None:
        if self.selection in SELECTORS:
            return None
        if not self.selection.startswith("fixed:"):
            raise ConfigError(
                "selection", f"expected one of {SELECTORS} or fixed:<i,j,...>, got {self.selection!r}"
            )
        try:
            idx = tuple(int(t) for t in self.selection[len("fixed:"):].split(","))
            sel = BeamSelection(idx)
            sel.validate_for(self.M)
        except ValueError as exc:
            raise ConfigError("selection", str(exc)) from None
        if len(idx) != self.N_s:
            raise ConfigError("selection", f"fixed selection has {len(idx)} beams, N_s = {self.N_s}")
        return idx

    def los(self) -> LosModel:
        text = self.los_model
        try:
            if text == "gaussian":
                return LosModel("gaussian")
            if text.startswith("ula:"):
                angles = tuple(float(a) for a in text[4:].split(","))
                if len(angles) != self.N_u:
                    raise ValueError(f"need {self.N_u} angles, got {len(angles)}")
                return LosModel("ula", angles)
        except ValueError as exc:
            raise ConfigError("los_model", str(exc)) from None
        raise ConfigError("los_model", f"expected gaussian or ula:<angles>, got {text!r}")

    def ricean(self) -> RiceanParams:
        los = gen_los(self.los(), self.M, self.N_u, self.seed)
        kappas = db_to_linear(self._per_user("k_db", self.k_db))
        return RiceanParams(self._per_user("betas", self.betas), kappas, los)


@dataclass(frozen=True)
class ResultRow:
    snr_db: float
    k_db: float
    scheme: str
    selection_indices: tuple[int, ...]
    user_index: int
    rate_exact: float
    rate_approx: float
    mc_stderr: float
    comparisons: int
    discarded_drops: int
    sweep_value: float | None = field(default=None, compare=False)

    def record(self) -> dict[str, Any]:
        return {
            "snr_db": self.snr_db,
            "k_db": self.k_db,
            "scheme": self.scheme,
            "selection": ";".join(str(i) for i in self.selection_indices),
            "user": self.user_index,
            "rate_exact": self.rate_exact,
            "rate_approx": self.rate_approx,
            "mc_stderr": self.mc_stderr,
            "comparisons": self.comparisons,
            "discarded_drops": self.discarded_drops,
        }


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Select beams once from long-term CSI, then evaluate every SNR point.

    Channel drops are shared by all SNR points, so the exact-rate estimates
    at a given SNR do not depend on the rest of the grid.
    """
    cfg.validate()
    scheme = cfg.scheme
    p = cfg.ricean()
    cb = build_dft(cfg.M)
    fixed = cfg.fixed_indices()
    if fixed is not None:
        indices, comparisons = fixed, 0
    else:
        ctx = SelectionContext(
            p, cb, scheme, LinkPowers.from_snr_db(cfg.selection_snr_db), cfg.N_s,
            margin=cfg.margin_n, budget=cfg.budget,
        )
        result = select(ctx, cfg.selection)
        indices, comparisons = result.selection.indices, result.comparisons
    F = analog_beamformer(cb, indices)
    geq = draw_effective(p, F, McConfig(cfg.drops, cfg.seed))
    rho2 = 1.0 / expected_geq_power(p, F) if scheme == DL_MRT_LT else None

    kdb = cfg._per_user("k_db", cfg.k_db)
    k_sum = float(kdb[0]) if np.all(kdb == kdb[0]) else math.nan
    rows: list[ResultRow] = []
    for snr in cfg.snr_db_grid:
        pw = LinkPowers.from_snr_db(float(snr))
        exact = exact_from_drops(scheme, geq, pw, mrt_rho2=rho2)
        approx = approx_rate(scheme, p, F, pw)
        common = dict(scheme=scheme, selection_indices=tuple(indices),
                      comparisons=comparisons, discarded_drops=exact.discarded)
        for k in range(cfg.N_u):
            rows.append(ResultRow(
                snr_db=float(snr), k_db=float(kdb[k]), user_index=k,
                rate_exact=float(exact.per_user[k]), rate_approx=float(approx.per_user[k]),
                mc_stderr=float(exact.stderr[k]), **common,
            ))
        rows.append(ResultRow(
            snr_db=float(snr), k_db=k_sum, user_index=SUM_ROW,
            rate_exact=exact.sum, rate_approx=approx.sum,
            mc_stderr=exact.sum_stderr, **common,
        ))
    return rows


def _apply_axis(cfg: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "snr":
        return cfg.replace(snr_db_grid=(float(value),))
    if axis == "k_db":
        return cfg.replace(k_db=float(value))
    if float(value) != int(value):
        raise ConfigError("margin_n", f"must be an integer, got {value!r}")
    return cfg.replace(margin_n=int(value))


def sweep(cfg: ExperimentConfig, axis: str, values: Sequence[float], workers: int = 1) -> list[ResultRow]:
    """Run one experiment per axis value and concatenate the rows.

    Every point reuses the base seed, so all points see the same LoS matrix
    and the same per-drop fading draws. Rows come back ordered by axis value
    regardless of ``workers``.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError("axis", f"must be one of {SWEEP_AXES}, got {axis!r}")
    if len(values) == 0:
        raise ConfigError("values", "sweep needs at least one value")
    values = sorted(float(v) for v in values)
    configs = [_apply_axis(cfg, axis, v) for v in values]

    def one(item):
        value, sub = item
        return [dataclasses.replace(r, sweep_value=value) for r in run_experiment(sub)]

    items = list(zip(values, configs))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(one, items))
    else:
        chunks = [one(it) for it in items]
    return [row for chunk in chunks for row in chunk]


# ------------------------------------------------------------------ output

def _fmt(value) -> Any:
    if isinstance(value, float):
        return f"{value:.10g}"
    return value


def _json_value(value) -> Any:
    if isinstance(value, float):
        return None if math.isnan(value) else float(f"{value:.10g}")
    return value


def render(rows: Sequence[ResultRow], fmt: str = "csv") -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in rows:
            rec = row.record()
            writer.writerow([_fmt(rec[name]) for name in CSV_FIELDS])
        return buf.getvalue()
    if fmt == "json":
        records = [{k: _json_value(v) for k, v in row.record().items()} for row in rows]
        return json.dumps(records, indent=1) + "\n"
    raise ValueError(f"unknown output format {fmt!r}")


def emit(rows: Sequence[ResultRow], fmt: str, path: str) -> None:
    """Write rows atomically: the target either gets the full file or is untouched."""
    text = render(rows, fmt)
    directory = os.path.dirname(os.path.abspath(path))
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".dftbeam-", suffix=".tmp")
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def parse_csv(text: str) -> list[dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))
