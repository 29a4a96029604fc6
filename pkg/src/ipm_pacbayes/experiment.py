"""Repeated regression runs and their table/plot outputs.

One run per ``(m, repetition)`` pair; each pair draws from its own
``RandomSource`` derived from ``(master_seed, m, repetition)`` so rows are
reproducible independently of run order.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__, bounds
from .divergences import w1_projected_gaussian_upper
from .exceptions import InvalidArgumentError, UndefinedDivergenceError
from .linreg import (
    TrainConfig,
    empirical_risk_closed_form,
    generate_task,
    sample_dataset,
    test_risk_monte_carlo,
    train_posterior,
)
from .measures import RandomSource

__all__ = [
    "ExperimentConfig",
    "RunRecord",
    "ExperimentResult",
    "PRESETS",
    "confidence_interval",
    "run_single",
    "run_experiment",
    "format_csv",
    "write_outputs",
    "render_svg",
]

UNDEFINED = "undefined"
CSV_HEADER = ["n_samples", "train_risk", "train_ci", "test_risk", "test_ci", "uc_bound", "uc_ci",
              "wpb_bound", "wpb_ci", "klpb_bound", "klpb_ci"]
COLUMNS = ["train_risk", "test_risk", "uc_bound", "wpb_bound", "klpb_bound"]
CI_METHOD = "student-t 95%, df = repetitions - 1, sample std (ddof=1) / sqrt(repetitions)"

_OPTIMIZER_DEFAULTS = {"lr": 1e-3, "beta1": 0.9, "beta2": 0.999, "eps": 1e-8,
                       "batch_size": 256, "max_epochs": 2000, "tol": 1e-8}


@dataclass
class ExperimentConfig:
    d: int = 10
    m_values: list = field(default_factory=lambda: [100, 200, 300, 400])
    repetitions: int = 10
    delta: float = 0.05
    sigma_p: float = 1e-2
    sigma_q: float = 1e-3
    objective: str = "KLPB"
    r: float = 1.0
    r_q: float = 0.05
    x_radius: float = 0.1
    latent_radius: float = 0.1
    noise_half_width: float = 0.5
    n_test: int = 10000
    master_seed: int = 0
    optimizer: dict = field(default_factory=dict)

    def __post_init__(self):
        self.m_values = [int(m) for m in self.m_values]
        if self.objective not in ("WPB", "KLPB"):
            raise InvalidArgumentError(f"objective must be WPB or KLPB, got {self.objective!r}")
        if self.repetitions < 1 or not self.m_values or min(self.m_values) < 2:
            raise InvalidArgumentError("need repetitions >= 1 and every m >= 2")
        if not 0 < self.delta < 1:
            raise InvalidArgumentError("delta must lie in (0, 1)")
        unknown = set(self.optimizer) - set(_OPTIMIZER_DEFAULTS)
        if unknown:
            raise InvalidArgumentError(f"unknown optimizer settings: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> ExperimentConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def optimizer_settings(self) -> dict:
        return {**_OPTIMIZER_DEFAULTS, **self.optimizer}

    def train_config(self) -> TrainConfig:
        return TrainConfig(objective=self.objective, sigma_q=self.sigma_q, sigma_p=self.sigma_p,
                           delta=self.delta, r=self.r, r_q=self.r_q, **self.optimizer_settings())

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


PRESETS = {
    "wide-prior": dict(sigma_p=1e-2, sigma_q=1e-3, objective="KLPB"),
    "narrow-prior": dict(sigma_p=1e-4, sigma_q=1e-3, objective="KLPB"),
    "dirac": dict(sigma_p=0.0, sigma_q=0.0, objective="WPB"),
}


@dataclass(frozen=True)
class RunRecord:
    m: int
    repetition: int
    seed: int
    train_risk: float
    test_risk: float
    uc_bound: float
    wpb_bound: float
    klpb_bound: float | None  # None when the KL bound is undefined
    mu_q_norm: float


def confidence_interval(values) -> tuple[float, float]:
    """Mean and 95% half-width with the Student-t quantile."""
    x = np.asarray(values, dtype=float)
    mean = float(np.mean(x))
    if x.size < 2:
        return mean, 0.0
    half = stats.t.ppf(0.975, x.size - 1) * np.std(x, ddof=1) / math.sqrt(x.size)
    return mean, float(half)


def run_single(config: ExperimentConfig, m: int, repetition: int) -> RunRecord:
    """Task generation, sampling, training and evaluation for one ``(m, repetition)``."""
    source = RandomSource(config.master_seed).derive(m, repetition)
    task_rng, data_rng, train_rng, test_rng = (source.derive(k) for k in range(4))
    task = generate_task(task_rng, config.d, config.latent_radius, config.x_radius,
                         config.noise_half_width)
    data = sample_dataset(data_rng, task, m)
    tcfg = config.train_config()
    post = train_posterior(train_rng, data, tcfg)

    jhat = empirical_risk_closed_form(data, post)
    test = test_risk_monte_carlo(test_rng, task, post, config.n_test)
    uc = bounds.uc_linreg(m, config.delta, config.d)
    prior = tcfg.prior(config.d)
    w_bound = w1_projected_gaussian_upper(post.measure(config.r), prior)
    wpb = bounds.wpb_linreg(jhat, w_bound, m, config.delta, config.d, config.r).bound_value
    try:
        klpb = bounds.klpb_linreg(jhat, post.gaussian(), prior.base, m, config.delta).bound_value
    except UndefinedDivergenceError:
        klpb = None
    return RunRecord(m, repetition, source.seed, jhat, test, jhat + uc, wpb, klpb,
                     float(np.linalg.norm(post.mu_q)))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list

    def rows(self) -> list[dict]:
        """Per-``m`` table rows; each column is ``(mean, ci)`` or ``UNDEFINED``."""
        out = []
        for m in self.config.m_values:
            recs = [r for r in self.records if r.m == m]
            row = {"n_samples": m}
            for col in COLUMNS:
                vals = [getattr(r, col) for r in recs]
                row[col] = UNDEFINED if any(v is None for v in vals) else confidence_interval(vals)
            out.append(row)
        return out

    def metadata(self) -> dict:
        return {
            "master_seed": self.config.master_seed,
            "rng": "PCG64, per-run seed derived from SeedSequence([master_seed, m, repetition])",
            "config_hash": self.config.config_hash(),
            "optimizer": {"name": "Adam + projection onto r_q ball",
                          **self.config.optimizer_settings(), "init": "mu_q = 0"},
            "ci_method": CI_METHOD,
            "tool_version": __version__,
        }

    def to_dict(self) -> dict:
        rows = []
        for row in self.rows():
            entry = {"n_samples": row["n_samples"]}
            for col in COLUMNS:
                cell = row[col]
                entry[col] = cell if cell == UNDEFINED else {"mean": cell[0], "ci": cell[1]}
            rows.append(entry)
        return {
            "config": self.config.to_dict(),
            "metadata": self.metadata(),
            "rows": rows,
            "runs": [dataclasses.asdict(r) for r in self.records],
        }


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    records = [run_single(config, m, rep)
               for m in config.m_values for rep in range(config.repetitions)]
    return ExperimentResult(config, records)


def format_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in result.rows():
        line = [str(row["n_samples"])]
        for col in COLUMNS:
            cell = row[col]
            if cell == UNDEFINED:
                line += [UNDEFINED, UNDEFINED]
            else:
                line += [f"{cell[0]:.4f}", f"{cell[1]:.4f}"]
        writer.writerow(line)
    return buf.getvalue()


_SERIES_STYLE = [("train_risk", "Train risk", "#1f77b4"), ("test_risk", "Test risk", "#ff7f0e"),
                 ("uc_bound", "UC bound", "#2ca02c"), ("wpb_bound", "WPB bound", "#d62728"),
                 ("klpb_bound", "KLPB bound", "#9467bd")]


def render_svg(result: ExperimentResult, width: int = 640, height: int = 420) -> str:
    """Means versus number of samples, log-scaled y axis, one polyline per column."""
    rows = result.rows()
    ms = [row["n_samples"] for row in rows]
    series = []
    for key, label, color in _SERIES_STYLE:
        if any(row[key] == UNDEFINED for row in rows):
            continue
        series.append((label, color, [row[key][0] for row in rows]))
    values = [v for _, _, ys in series for v in ys if v > 0]
    lo, hi = math.floor(math.log10(min(values))), math.ceil(math.log10(max(values)))
    if hi == lo:
        hi += 1
    left, right, top, bottom = 70, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom
    mlo, mhi = min(ms), max(ms)
    span = (mhi - mlo) or 1

    def px(m):
        return left + (m - mlo) / span * pw

    def py(v):
        return top + (hi - math.log10(max(v, 10.0**lo))) / (hi - lo) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for e in range(lo, hi + 1):
        y = py(10.0**e)
        out.append(f'<line x1="{left}" y1="{y:.2f}" x2="{left + pw}" y2="{y:.2f}" stroke="#ddd"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">1e{e}</text>')
    for m in ms:
        x = px(m)
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{m}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle"># samples</text>')
    for i, (label, color, ys) in enumerate(series):
        pts = " ".join(f"{px(m):.2f},{py(v):.2f}" for m, v in zip(ms, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="2"/>')
        for m, v in zip(ms, ys):
            out.append(f'<circle cx="{px(m):.2f}" cy="{py(v):.2f}" r="3" fill="{color}"/>')
        ly = top + 10 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_outputs(result: ExperimentResult, out_dir) -> dict:
    """Write ``results.csv``, ``results.json`` and ``plot.svg``; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"csv": out / "results.csv", "json": out / "results.json", "svg": out / "plot.svg"}
    with open(paths["csv"], "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(result))
    with open(paths["json"], "w", encoding="utf-8", newline="\n") as fh:
        json.dump(result.to_dict(), fh, indent=2)
        fh.write("\n")
    with open(paths["svg"], "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_svg(result))
    return paths
