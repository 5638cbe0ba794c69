"""Experiment engine: convergence curves, balance metrics, alpha sweeps, timing.

There is no encoder/decoder here. A multi-layer cascade is modelled as
independent per-layer transforms, which is the granularity at which the
convergence curves are reported anyway.
"""

from __future__ import annotations

import os
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .features import centralize, check_feature, frobenius_sq, gram
from .ftz import read_ftz
from .linesearch import LineSearchError
from .methods import CLOSED_FORM, ITERATIVE, apply, check_method, default_config
from .objective import TransformConfig
from .rng import derive_seed
from .synthetic import gen_pair
from .trace import ConvergenceTrace, DivergenceError

Pair = tuple[np.ndarray, np.ndarray]

THREADS_ENV = "LSFT_THREADS"


@dataclass(frozen=True)
class AggregateCurve:
    mean: np.ndarray
    std: np.ndarray  # population standard deviation
    n_trials: int
    method: str = ""
    layer: str = ""


@dataclass(frozen=True)
class BalancePoint:
    alpha: float
    mean_content_loss: float
    mean_style_loss: float
    content_losses: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    style_losses: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)


@dataclass(frozen=True)
class TimingRow:
    shape: str
    channels: int
    samples: int
    method: str
    median_seconds: float
    times: tuple[float, ...] = ()


@dataclass(frozen=True)
class EtaHistogram:
    edges: np.ndarray  # len(counts) + 1
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


@dataclass(frozen=True)
class LayerSpec:
    label: str
    channels: int
    n_content: int
    n_style: int
    seed: int | None = None
    content_path: str | None = None
    style_path: str | None = None

    def __post_init__(self):
        if min(self.channels, self.n_content, self.n_style) < 1:
            raise ValueError(f"layer {self.label}: counts must be positive")
        if self.seed is None and (self.content_path is None or self.style_path is None):
            raise ValueError(f"layer {self.label}: needs a seed or both feature files")

    def load(self) -> Pair:
        if self.content_path is not None and self.style_path is not None:
            Fc, Fs = read_ftz(self.content_path), read_ftz(self.style_path)
            if Fc.shape[0] != self.channels or Fs.shape[0] != self.channels:
                raise ValueError(f"layer {self.label}: files do not have {self.channels} channels")
            return Fc, Fs
        return gen_pair(self.seed, self.channels, self.n_content, self.n_style)


# (label, channels, content samples) in cascade order, deepest layer first
LAYER_PRESETS = {
    "vgg": [("relu4_1", 512, 2048), ("relu3_1", 256, 1024), ("relu2_1", 128, 2048), ("relu1_1", 64, 4096)],
    "small": [("relu4_1", 64, 256), ("relu3_1", 32, 256), ("relu2_1", 16, 512), ("relu1_1", 8, 512)],
    "tiny": [("relu4_1", 16, 64), ("relu3_1", 8, 64), ("relu2_1", 4, 64), ("relu1_1", 2, 64)],
}


@dataclass(frozen=True)
class LayerSchedule:
    layers: tuple[LayerSpec, ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a layer schedule needs at least one layer")

    def __len__(self) -> int:
        return len(self.layers)

    @classmethod
    def preset(cls, name: str, seed: int = 0, style_fraction: float = 0.75) -> "LayerSchedule":
        """Synthetic schedule; style features have ``style_fraction`` of the content samples."""
        if name not in LAYER_PRESETS:
            raise ValueError(f"unknown layer preset {name!r}; choose from {', '.join(LAYER_PRESETS)}")
        return cls(tuple(
            LayerSpec(label, C, n, max(1, int(n * style_fraction)), seed=layer_seed(seed, i))
            for i, (label, C, n) in enumerate(LAYER_PRESETS[name])
        ))


def layer_seed(seed: int, layer_index: int) -> int:
    return derive_seed(seed, 1000 + layer_index)


def _n_jobs(n_jobs: int | None) -> int:
    if n_jobs is None:
        n_jobs = int(os.environ.get(THREADS_ENV, "1") or 1)
    return max(1, n_jobs)


def _run_one(method: str, Fc, Fs, cfg: TransformConfig, layer: str, seed) -> ConvergenceTrace:
    try:
        _, trace = ITERATIVE[method](Fc, Fs, cfg)
    except DivergenceError as exc:
        trace = exc.trace
    except LineSearchError as exc:
        trace = ConvergenceTrace(method=method, error=str(exc))
    trace.layer = layer
    trace.seed = seed
    return trace


def compare_methods(
    pairs: Iterable[Pair],
    methods: Sequence[str],
    cfgs: dict[str, TransformConfig] | None = None,
    iters: int | dict[str, int] = 15,
    *,
    layer: str = "",
    seeds: Sequence[int] | None = None,
    n_jobs: int | None = None,
) -> dict[str, list[ConvergenceTrace]]:
    """Run several iterative methods on the same pairs, ``iters`` records each.

    ``iters`` may be a per-method mapping, e.g. ``{"ls-ft": 1, "m-iterft": 15}``.

    Early stopping is disabled. Failures (divergence, line-search faults)
    are kept in the trace's ``error`` field instead of aborting the batch.
    """
    for m in methods:
        if m not in ITERATIVE:
            raise ValueError(f"{m!r} is not an iterative method")
    cfgs = dict(cfgs or {})
    if not isinstance(iters, dict):
        iters = {m: iters for m in methods}
    bench = {
        m: (cfgs.get(m) or default_config(m)).with_(iterations=iters[m], early_stop=False)
        for m in methods
    }

    def job(item):
        i, (Fc, Fs) = item
        seed = seeds[i] if seeds is not None else None
        return {m: _run_one(m, Fc, Fs, bench[m], layer, seed) for m in methods}

    indexed = enumerate(pairs)
    workers = _n_jobs(n_jobs)
    if workers == 1:
        results = [job(item) for item in indexed]
    else:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(job, indexed))
    if not results:
        raise ValueError("convergence experiment needs at least one pair")
    return {m: [r[m] for r in results] for m in methods}


def convergence_experiment(pairs, method: str, cfg: TransformConfig | None = None, iters: int = 15, **kwargs):
    """One trace per pair, each with exactly ``iters`` records unless it failed."""
    cfgs = {method: cfg} if cfg is not None else None
    return compare_methods(pairs, [method], cfgs, iters, **kwargs)[method]


def aggregate_traces(traces: Sequence[ConvergenceTrace]) -> AggregateCurve:
    """Pointwise mean and population standard deviation across trials."""
    if not traces:
        raise ValueError("cannot aggregate an empty list of traces")
    lengths = {len(t) for t in traces}
    if len(lengths) != 1:
        raise ValueError(f"traces have unequal lengths {sorted(lengths)}")
    X = np.stack([t.losses for t in traces]) if lengths != {0} else np.empty((len(traces), 0))
    mean = X.mean(axis=0)
    std = np.sqrt(np.mean((X - mean) ** 2, axis=0))
    return AggregateCurve(mean, std, len(traces), traces[0].method, traces[0].layer)


def content_style_losses(features_sty, features_c, features_s, n_layers: int = 4) -> tuple[float, float]:
    """Balance metrics on per-layer lists ordered shallow to deep.

    Content loss compares centered stylized and content features at the
    deepest layer; style loss sums squared Gram differences over all
    layers, normalising the stylized Gram by its own sample count.
    """
    lists = (features_sty, features_c, features_s)
    if any(len(x) != n_layers for x in lists):
        raise ValueError(
            f"expected {n_layers} layers, got {[len(x) for x in lists]} (stylized, content, style)"
        )
    style = 0.0
    content = 0.0
    for N, (Fsty, Fc, Fs) in enumerate(zip(*lists)):
        Fsty_bar, _ = centralize(check_feature(Fsty, f"stylized layer {N + 1}"))
        Fs_bar, _ = centralize(check_feature(Fs, f"style layer {N + 1}"))
        style += frobenius_sq(gram(Fsty_bar) - gram(Fs_bar))
        if N == n_layers - 1:
            Fc_bar, _ = centralize(check_feature(Fc, f"content layer {N + 1}"))
            if Fc_bar.shape != Fsty_bar.shape:
                raise ValueError(f"deepest layer shapes differ: {Fsty_bar.shape} vs {Fc_bar.shape}")
            content = frobenius_sq(Fsty_bar - Fc_bar)
    return content, style


@dataclass
class ScheduleResult:
    labels: list[str]
    outputs: list[np.ndarray]
    traces: list[ConvergenceTrace | None]
    content_loss: float
    style_loss: float


def layer_schedule_run(schedule: LayerSchedule, method: str, cfg: TransformConfig | None = None, **apply_kwargs) -> ScheduleResult:
    """Transform each layer pair in cascade order, then score the balance."""
    check_method(method)
    outputs, traces, cs, ss = [], [], [], []
    for spec in schedule.layers:
        Fc, Fs = spec.load()
        try:
            Ft, trace = apply(method, Fc, Fs, cfg, **apply_kwargs)
        except Exception as exc:
            raise RuntimeError(f"layer {spec.label}: {exc}") from exc
        if trace is not None:
            trace.layer = spec.label
            trace.seed = spec.seed
        outputs.append(Ft)
        traces.append(trace)
        cs.append(Fc)
        ss.append(Fs)
    # metrics take shallow-to-deep order; the cascade runs deep-to-shallow
    content, style = content_style_losses(outputs[::-1], cs[::-1], ss[::-1], n_layers=len(schedule))
    return ScheduleResult([s.label for s in schedule.layers], outputs, traces, content, style)


def alpha_sweep(pairs: Sequence[Pair], method: str, alphas: Sequence[float], cfg: TransformConfig | None = None) -> list[BalancePoint]:
    """Mean single-layer content and style losses for each alpha."""
    if not alphas:
        raise ValueError("alpha sweep needs at least one alpha")
    if method not in ITERATIVE:
        raise ValueError(f"alpha only affects the iterative methods, not {method!r}")
    base = cfg or default_config(method)
    pairs = list(pairs)
    points = []
    for alpha in alphas:
        run_cfg = base.with_(alpha=float(alpha), lam=None)
        c_losses, s_losses = [], []
        for Fc, Fs in pairs:
            Ft, _ = ITERATIVE[method](Fc, Fs, run_cfg)
            c, s = content_style_losses([Ft], [Fc], [Fs], n_layers=1)
            c_losses.append(c)
            s_losses.append(s)
        c_arr, s_arr = np.array(c_losses), np.array(s_losses)
        points.append(BalancePoint(float(alpha), float(c_arr.mean()), float(s_arr.mean()), c_arr, s_arr))
    return points


# feature-map analogs of HD/FHD/QHD/UHD frames: 64 channels at 1/16 of the pixels
SHAPE_PRESETS = {
    "tiny": (16, 4096),
    "hd": (64, 1280 * 720 // 16),
    "fhd": (64, 1920 * 1080 // 16),
    "qhd": (64, 2560 * 1440 // 16),
    "uhd": (64, 3840 * 2160 // 16),
}

# iteration counts used when timing, matching the convergence protocol
TIMING_ITERATIONS = {"ls-ft": 1, "m-iterft": 15, "iterft": 15}


def timing_bench(
    shapes: Sequence[tuple[int, int] | str],
    methods: Sequence[str],
    repeats: int = 5,
    *,
    warmup: int = 2,
    seed: int = 0,
    cfgs: dict[str, TransformConfig] | None = None,
) -> list[TimingRow]:
    """Median wall time per (shape, method); warm-up runs are discarded.

    Runs strictly sequentially.
    """
    if repeats < 3:
        raise ValueError(f"timing needs repeats >= 3, got {repeats}")
    for m in methods:
        check_method(m)
    cfgs = dict(cfgs or {})
    rows = []
    for shape in shapes:
        if isinstance(shape, str):
            if shape not in SHAPE_PRESETS:
                raise ValueError(f"unknown shape preset {shape!r}; choose from {', '.join(SHAPE_PRESETS)}")
            label, (C, n) = shape, SHAPE_PRESETS[shape]
        else:
            C, n = shape
            label = f"{C}x{n}"
        Fc, Fs = gen_pair(seed, C, n, n)
        for m in methods:
            cfg = cfgs.get(m)
            if m in ITERATIVE:
                cfg = (cfg or default_config(m)).with_(iterations=TIMING_ITERATIONS[m])
            times = []
            for i in range(warmup + repeats):
                t0 = time.perf_counter()
                apply(m, Fc, Fs, cfg)
                dt = time.perf_counter() - t0
                if i >= warmup:
                    times.append(dt)
            rows.append(TimingRow(label, C, n, m, statistics.median(times), tuple(times)))
    return rows


def speedups(rows: Sequence[TimingRow], fast: str = "ls-ft", slow: str = "m-iterft") -> dict[str, float]:
    """``median(slow) / median(fast)`` per shape label."""
    by = {(r.shape, r.method): r.median_seconds for r in rows}
    return {
        shape: by[(shape, slow)] / by[(shape, fast)]
        for shape, m in by
        if m == fast and (shape, slow) in by
    }


def eta_histogram(traces: Iterable[ConvergenceTrace], bins: int = 40) -> EtaHistogram:
    """Fixed-width histogram of line-searched steps over ``[0, max eta]``."""
    etas = np.array([e for t in traces for e in t.etas], dtype=np.float64)
    if etas.size == 0:
        raise ValueError("no step sizes recorded in the given traces")
    counts, edges = np.histogram(etas, bins=bins, range=(0.0, float(etas.max())))
    return EtaHistogram(edges, counts)


@dataclass(frozen=True)
class AblationRow:
    method: str
    recenter: bool
    mean_final_loss: float
    std_final_loss: float
    failures: int
    mean_offset: float  # mean ||mean(output) - mean(style)||


def ablation(pairs: Sequence[Pair], iters: int = 15, alpha: float = 1.0) -> list[AblationRow]:
    """Raw IterFT against the centered variants, with re-centering on and off.

    Losses are each method's own objective (raw for ``iterft``).
    """
    variants = [("iterft", False), ("m-iterft", True), ("m-iterft", False), ("ls-ft", True), ("ls-ft", False)]
    pairs = list(pairs)
    rows = []
    for method, recenter in variants:
        cfg = default_config(method, alpha=alpha, recenter_each_step=recenter)
        if method == "ls-ft":
            cfg = cfg.with_(iterations=1)
        else:
            cfg = cfg.with_(iterations=iters)
        losses, offsets, failures = [], [], 0
        for Fc, Fs in pairs:
            try:
                Ft, trace = ITERATIVE[method](Fc, Fs, cfg)
            except (DivergenceError, LineSearchError):
                failures += 1
                continue
            losses.append(trace.final_loss)
            offsets.append(float(np.linalg.norm(Ft.mean(axis=1) - Fs.mean(axis=1))))
        arr = np.array(losses) if losses else np.array([np.nan])
        rows.append(AblationRow(
            method, recenter, float(np.mean(arr)), float(np.std(arr)), failures,
            float(np.mean(offsets)) if offsets else float("nan"),
        ))
    return rows


__all__ = [
    "AblationRow",
    "AggregateCurve",
    "BalancePoint",
    "CLOSED_FORM",
    "EtaHistogram",
    "LayerSchedule",
    "LayerSpec",
    "ScheduleResult",
    "SHAPE_PRESETS",
    "TimingRow",
    "ablation",
    "aggregate_traces",
    "alpha_sweep",
    "compare_methods",
    "content_style_losses",
    "convergence_experiment",
    "eta_histogram",
    "layer_schedule_run",
    "speedups",
    "timing_bench",
]
