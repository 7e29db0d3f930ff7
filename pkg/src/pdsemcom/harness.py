"""Sweep orchestration: quantize, code, corrupt, classify, tabulate.

One sweep runs the full factorial over (pipeline, m, alpha, code) cells,
appends one results row per cell to a CSV keyed by a config hash, and can
resume after a kill by skipping keys already present. Curve emission turns
the rows into the distortion/rate/accuracy trade-off charts as CSV + SVG.
"""

import csv
import hashlib
import math
import os
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .channel import BscChannel, transmit, transmit_bits
from .codec import (bch_encode, bch_generator, build_huffman,
                    decode_or_passthrough, huffman_decode, huffman_encode,
                    pack_objects)
from .dataset import load_pointcloud_file, synth_dataset
from .errors import ParseError, PipelineError
from .homology import load_pd_file, vr_diagram
from .infotheory import (bottleneck_style_distortion, cell_probabilities,
                         estimate_density, mse_distortion, quantizer_entropy,
                         semantic_rate)
from .inference import (CvSchedule, PerslayConfig, evaluate_accuracy,
                        perslay_vectorize, rasterize_raw, train_classifier)
from .quantizer import QuantizerGrid, quantize_diagram, quantize_set

PIPELINE_KINDS = ("pd", "raw", "latent")
CURVE_KINDS = ("dr", "ad", "ar", "ar-coded")

SEED_ENV = "PDSEMCOM_SEED"
WORKERS_ENV = "PDSEMCOM_WORKERS"

COLUMNS = ("pipeline", "m", "alpha", "code", "status", "schedule", "seed",
           "entropy_bits", "mean_symbols", "rate_cells", "rate_selfinfo",
           "huffman_bits", "wire_bits", "avg_codeword_len", "mse",
           "bottleneck", "acc_mean", "band_low", "band_high", "acc_std",
           "symbol_error_rate", "decode_failures", "error")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "%.10g" % float(x)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one sweep depends on; hashable as canonical text.

    `dataset` is either the literal "synth" or a point-cloud CSV path.
    `codes` lists (n, k, t) block codes swept in addition to the always
    present uncoded cell. `out` and `workers` are artifact plumbing and do
    not enter the config hash.
    """

    pipelines: tuple = ("pd", "raw")
    dataset: str = "synth"
    latent_file: str | None = None
    per_class: int = 200
    n_points: int = 48
    noise: float = 0.2
    dataset_seed: int = 7
    gamma_max: float = 16.0
    box_pd: float = 16.0
    box_raw: float = 28.0
    box_latent: float = 1.0
    m_values: tuple = tuple(range(10, 28))
    partition: int = 28
    T: int = 10
    cv_seed: int = 1
    train_seed: int = 3
    channel_seed: int = 11
    alphas: tuple = (0.0,)
    codes: tuple = ()
    epochs: int = 300
    hidden: tuple = (128, 64)
    drop_essential: bool = False
    collapse_duplicates: bool = False
    workers: int = 1
    out: str = "results.csv"

    def __post_init__(self):
        if not self.pipelines:
            raise ValueError("at least one pipeline kind is required")
        for p in self.pipelines:
            if p not in PIPELINE_KINDS:
                raise ValueError(f"unknown pipeline kind {p!r}")
        if len(set(self.pipelines)) != len(self.pipelines):
            raise ValueError("duplicate pipeline kinds")
        if self.dataset != "synth" and not os.path.exists(self.dataset):
            raise ValueError(f"dataset file {self.dataset!r} does not exist")
        if "latent" in self.pipelines:
            if not self.latent_file:
                raise ValueError("latent pipeline requires latent_file")
        if self.latent_file and not os.path.exists(self.latent_file):
            raise ValueError(f"latent file {self.latent_file!r} does not exist")
        if self.dataset == "synth" and (3 * self.per_class) % 2 != 0:
            raise ValueError("per_class must be even for half/half folds")
        ms = tuple(sorted(set(int(m) for m in self.m_values)))
        if not ms:
            raise ValueError("m_values must not be empty")
        for m in ms:
            if not 2 <= m <= 28:
                raise ValueError(f"m={m} outside the supported [2, 28] range")
        object.__setattr__(self, "m_values", ms)
        alphas = tuple(sorted(set(float(a) for a in self.alphas)))
        for a in alphas:
            if not 0.0 <= a < 0.5:
                raise ValueError(f"alpha={a} outside [0, 0.5)")
        object.__setattr__(self, "alphas", alphas)
        codes = tuple((int(n), int(k), int(t)) for n, k, t in self.codes)
        for n, k, t in codes:
            g = (n + 1).bit_length() - 1
            if (1 << g) - 1 != n:
                raise ValueError(f"code length {n} is not 2^g - 1")
            if not 0 < k < n:
                raise ValueError(f"message length {k} outside (0, {n})")
            if t < 1:
                raise ValueError("error capability must be at least 1")
        object.__setattr__(self, "codes", codes)
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        for name, low in (("per_class", 1), ("n_points", 4), ("partition", 1),
                          ("T", 1), ("epochs", 1), ("workers", 1)):
            if getattr(self, name) < low:
                raise ValueError(f"{name} must be at least {low}")
        for name in ("gamma_max", "box_pd", "box_raw", "box_latent"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if not self.hidden or any(h < 1 for h in self.hidden):
            raise ValueError("hidden layer sizes must be positive")

    def box_for(self, pipeline: str) -> float:
        return {"pd": self.box_pd, "raw": self.box_raw,
                "latent": self.box_latent}[pipeline]

    def canonical_text(self, include_artifacts: bool = False) -> str:
        lines = [
            "pipelines = " + ",".join(self.pipelines),
            "dataset = " + self.dataset,
            "latent_file = " + (self.latent_file or "none"),
            "per_class = %d" % self.per_class,
            "n_points = %d" % self.n_points,
            "noise = " + _fmt(self.noise),
            "dataset_seed = %d" % self.dataset_seed,
            "gamma_max = " + _fmt(self.gamma_max),
            "box_pd = " + _fmt(self.box_pd),
            "box_raw = " + _fmt(self.box_raw),
            "box_latent = " + _fmt(self.box_latent),
            "m_values = " + ",".join(str(m) for m in self.m_values),
            "partition = %d" % self.partition,
            "T = %d" % self.T,
            "cv_seed = %d" % self.cv_seed,
            "train_seed = %d" % self.train_seed,
            "channel_seed = %d" % self.channel_seed,
            "alphas = " + ",".join(_fmt(a) for a in self.alphas),
            "codes = " + (",".join("%d:%d:%d" % c for c in self.codes)
                          if self.codes else "none"),
            "epochs = %d" % self.epochs,
            "hidden = " + ",".join(str(h) for h in self.hidden),
            "drop_essential = " + ("true" if self.drop_essential else "false"),
            "collapse_duplicates = " + ("true" if self.collapse_duplicates
                                        else "false"),
        ]
        if include_artifacts:
            lines += ["workers = %d" % self.workers, "out = " + self.out]
        return "\n".join(lines) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(
            self.canonical_text().encode("utf-8")).hexdigest()[:16]


def _parse_int_list(v: str) -> tuple:
    out = []
    for tok in v.split(","):
        tok = tok.strip()
        if ".." in tok:
            lo, hi = tok.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(tok))
    return tuple(out)


def _parse_codes(v: str) -> tuple:
    if v.strip().lower() == "none":
        return ()
    out = []
    for tok in v.split(","):
        n, k, t = tok.strip().split(":")
        out.append((int(n), int(k), int(t)))
    return tuple(out)


def _parse_bool(v: str) -> bool:
    s = v.strip().lower()
    if s in ("true", "1", "yes"):
        return True
    if s in ("false", "0", "no"):
        return False
    raise ValueError(f"expected a boolean, got {v!r}")


_KEY_PARSERS = {
    "pipelines": lambda v: tuple(s.strip() for s in v.split(",")),
    "dataset": lambda v: v.strip(),
    "latent_file": lambda v: None if v.strip().lower() == "none" else v.strip(),
    "per_class": int, "n_points": int, "dataset_seed": int,
    "partition": int, "T": int, "cv_seed": int, "train_seed": int,
    "channel_seed": int, "epochs": int, "workers": int,
    "noise": float, "gamma_max": float,
    "box_pd": float, "box_raw": float, "box_latent": float,
    "m_values": _parse_int_list,
    "alphas": lambda v: tuple(float(s) for s in v.split(",")),
    "codes": _parse_codes,
    "hidden": _parse_int_list,
    "drop_essential": _parse_bool,
    "collapse_duplicates": _parse_bool,
    "out": lambda v: v.strip(),
}


def parse_config(text: str) -> ExperimentConfig:
    """Key = value lines; '#' starts a comment; unknown keys are errors."""
    data = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw!r}",
                             line_number=ln)
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEY_PARSERS:
            raise ParseError(f"unknown config key {key!r}", line_number=ln)
        try:
            data[key] = _KEY_PARSERS[key](value)
        except ValueError as exc:
            raise ParseError(f"bad value for {key!r}: {exc}",
                             line_number=ln) from exc
    try:
        return ExperimentConfig(**data)
    except ValueError as exc:
        raise ParseError(str(exc), line_number=0) from exc


def load_config(path) -> ExperimentConfig:
    """Read a config file and apply the documented env overrides.

    PDSEMCOM_SEED replaces all four seeds (dataset, cv, train, channel get
    s, s+1, s+2, s+3); PDSEMCOM_WORKERS replaces the worker count.
    """
    with open(path) as f:
        config = parse_config(f.read())
    if os.environ.get(SEED_ENV):
        s = int(os.environ[SEED_ENV])
        config = replace(config, dataset_seed=s, cv_seed=s + 1,
                         train_seed=s + 2, channel_seed=s + 3)
    if os.environ.get(WORKERS_ENV):
        config = replace(config, workers=int(os.environ[WORKERS_ENV]))
    return config


def write_config(path, config: ExperimentConfig) -> None:
    with open(path, "w") as f:
        f.write(config.canonical_text(include_artifacts=True))


@dataclass(frozen=True)
class TradeoffRecord:
    """One sweep cell: rates, distortions, accuracy, channel bookkeeping."""

    pipeline: str
    m: int
    alpha: float
    code: str
    status: str
    schedule: str
    seed: int
    entropy_bits: float
    mean_symbols: float
    rate_cells: float
    rate_selfinfo: float
    huffman_bits: float
    wire_bits: float
    avg_codeword_len: float
    mse: float
    bottleneck: float
    acc_mean: float
    band_low: float
    band_high: float
    acc_std: float
    symbol_error_rate: float
    decode_failures: int
    error: str = ""

    def __post_init__(self):
        if self.status not in ("ok", "error"):
            raise ValueError(f"bad status {self.status!r}")
        if self.status == "ok":
            numeric = (self.entropy_bits, self.mean_symbols, self.rate_cells,
                       self.rate_selfinfo, self.huffman_bits, self.wire_bits,
                       self.avg_codeword_len, self.mse, self.bottleneck,
                       self.acc_mean, self.band_low, self.band_high,
                       self.acc_std, self.symbol_error_rate)
            if not all(math.isfinite(x) for x in numeric):
                raise ValueError("ok records must have finite numeric fields")
            if not 0.0 <= self.acc_mean <= 1.0:
                raise ValueError(f"accuracy {self.acc_mean} outside [0, 1]")

    @property
    def key(self) -> tuple:
        return (self.pipeline, self.m, _fmt(self.alpha), self.code)

    def to_row(self) -> list:
        return [self.pipeline, str(self.m), _fmt(self.alpha), self.code,
                self.status, self.schedule, str(self.seed),
                _fmt(self.entropy_bits), _fmt(self.mean_symbols),
                _fmt(self.rate_cells), _fmt(self.rate_selfinfo),
                _fmt(self.huffman_bits), _fmt(self.wire_bits),
                _fmt(self.avg_codeword_len), _fmt(self.mse),
                _fmt(self.bottleneck), _fmt(self.acc_mean),
                _fmt(self.band_low), _fmt(self.band_high),
                _fmt(self.acc_std), _fmt(self.symbol_error_rate),
                str(self.decode_failures), self.error]

    @classmethod
    def from_row(cls, row: dict) -> "TradeoffRecord":
        return cls(
            pipeline=row["pipeline"], m=int(row["m"]),
            alpha=float(row["alpha"]), code=row["code"], status=row["status"],
            schedule=row["schedule"], seed=int(row["seed"]),
            entropy_bits=float(row["entropy_bits"]),
            mean_symbols=float(row["mean_symbols"]),
            rate_cells=float(row["rate_cells"]),
            rate_selfinfo=float(row["rate_selfinfo"]),
            huffman_bits=float(row["huffman_bits"]),
            wire_bits=float(row["wire_bits"]),
            avg_codeword_len=float(row["avg_codeword_len"]),
            mse=float(row["mse"]), bottleneck=float(row["bottleneck"]),
            acc_mean=float(row["acc_mean"]), band_low=float(row["band_low"]),
            band_high=float(row["band_high"]), acc_std=float(row["acc_std"]),
            symbol_error_rate=float(row["symbol_error_rate"]),
            decode_failures=int(row["decode_failures"]), error=row["error"],
        )


def read_results(path):
    """-> (config hash, records). Inverse of the sweep's CSV writer."""
    with open(path, newline="") as f:
        first = f.readline().strip()
        if not first.startswith("# config_hash="):
            raise ParseError("results file lacks the config hash header",
                             line_number=1)
        config_hash = first.split("=", 1)[1]
        records = [TradeoffRecord.from_row(row) for row in csv.DictReader(f)]
    return config_hash, records


def _normalize_latents(point_sets, box_side: float):
    """Uniform scale + translation of every set into [0, box]^2."""
    allpts = np.vstack(point_sets)
    lo = allpts.min(axis=0)
    span = float(np.max(allpts.max(axis=0) - lo))
    if span <= 0:
        raise ValueError("latent points are all identical; cannot normalize")
    s = box_side / span
    return [(pts - lo) * s for pts in point_sets]


class _SweepContext:
    """Shared immutable state plus lazily built per-(pipeline, m) caches."""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        if config.dataset == "synth":
            self.dataset = synth_dataset(per_class=config.per_class,
                                         n_points=config.n_points,
                                         noise=config.noise,
                                         seed=config.dataset_seed)
        else:
            self.dataset = load_pointcloud_file(config.dataset)
        n = len(self.dataset.objects)
        self.labels = self.dataset.labels()
        if np.any(self.labels <= 0):
            raise ValueError("sweep requires a label for every object")
        self.object_ids = np.array([o.id for o in self.dataset.objects])
        self.schedule = CvSchedule(n_objects=n, T=config.T,
                                   seed=config.cv_seed)
        self.perslay = PerslayConfig(box_side=config.box_pd)
        # every index that ever lands in a test fold, plus its multiplicity
        self.test_multiset = np.concatenate(
            [test for _, test in self.schedule.folds])
        self.unique_test = np.unique(self.test_multiset)
        # reentrant: prep() holds the lock while calling other accessors
        self._lock = threading.RLock()
        self._diagrams = None
        self._latent_points = None
        self._clean_points = {}
        self._clean_features = {}
        self._classifiers = {}
        self._density = {}
        self._prep = {}
        self._bch = {}

    def diagrams(self):
        with self._lock:
            if self._diagrams is None:
                diags = []
                for obj in self.dataset.objects:
                    d = vr_diagram(obj.points, gamma_max=self.config.gamma_max)
                    diags.append(d.drop_essential()
                                 if self.config.drop_essential else d)
                self._diagrams = diags
            return self._diagrams

    def latent_points(self):
        with self._lock:
            if self._latent_points is None:
                entries = load_pd_file(self.config.latent_file)
                missing = [i for i in self.object_ids if i not in entries]
                if missing:
                    raise ValueError(
                        f"latent file lacks object {missing[0]} (and "
                        f"{len(missing) - 1} more)")
                raw = []
                for oid in self.object_ids:
                    d = entries[oid]
                    raw.append(np.vstack([d.points(0), d.points(1)]))
                counts = {len(p) for p in raw}
                if len(counts) != 1:
                    raise ValueError(
                        f"latent sets must share one point count, got {sorted(counts)}")
                self._latent_points = _normalize_latents(
                    raw, self.config.box_latent)
            return self._latent_points

    def clean_points(self, pipeline: str):
        with self._lock:
            if pipeline not in self._clean_points:
                if pipeline == "pd":
                    pts = [np.vstack([d.points(0), d.points(1)])
                           for d in self.diagrams()]
                elif pipeline == "raw":
                    pts = [o.points for o in self.dataset.objects]
                else:
                    pts = self.latent_points()
                self._clean_points[pipeline] = pts
            return self._clean_points[pipeline]

    def clean_features(self, pipeline: str):
        with self._lock:
            if pipeline not in self._clean_features:
                if pipeline == "pd":
                    feats = np.array([perslay_vectorize(self.perslay, d)
                                      for d in self.diagrams()])
                elif pipeline == "raw":
                    feats = np.array([
                        rasterize_raw(o.points, box_side=self.config.box_raw)
                        for o in self.dataset.objects])
                else:
                    feats = np.array([p.ravel()
                                      for p in self.latent_points()])
                self._clean_features[pipeline] = feats
            return self._clean_features[pipeline]

    def classifier(self, pipeline: str, t: int):
        key = (pipeline, t)
        with self._lock:
            if key not in self._classifiers:
                feats = self.clean_features(pipeline)
                train, _ = self.schedule.folds[t]
                fold_seed = int(np.random.SeedSequence(
                    entropy=self.config.train_seed,
                    spawn_key=(PIPELINE_KINDS.index(pipeline), t),
                ).generate_state(1)[0])
                self._classifiers[key] = train_classifier(
                    feats[train], self.labels[train],
                    hidden_sizes=self.config.hidden,
                    epochs=self.config.epochs, seed=fold_seed)
            return self._classifiers[key]

    def density(self, pipeline: str):
        with self._lock:
            if pipeline not in self._density:
                pts = self.clean_points(pipeline)
                self._density[pipeline] = estimate_density(
                    [pts[i] for i in self.test_multiset],
                    box_side=self.config.box_for(pipeline),
                    partition=self.config.partition)
            return self._density[pipeline]

    def bch(self, spec: tuple):
        with self._lock:
            if spec not in self._bch:
                n, k, t = spec
                m_gf = (n + 1).bit_length() - 1
                code = bch_generator(m_gf, t)
                if code.k != k:
                    raise ValueError(
                        f"designed-distance construction at t={t} yields "
                        f"k={code.k}, config says {k}")
                self._bch[spec] = code
            return self._bch[spec]

    def warm(self):
        """Best-effort prebuild of shared state before parallel cells.

        A failing resource is left unbuilt; the cells that need it re-raise
        through the lazy accessor and are recorded as per-cell errors, so
        one bad pipeline or code spec cannot take down the whole sweep.
        """
        for p in self.config.pipelines:
            try:
                self.clean_points(p)
                self.clean_features(p)
                self.density(p)
                for t in range(self.config.T):
                    self.classifier(p, t)
            except (PipelineError, ValueError):
                pass
        for spec in self.config.codes:
            try:
                self.bch(spec)
            except (PipelineError, ValueError):
                pass

    def prep(self, pipeline: str, m: int):
        key = (pipeline, m)
        with self._lock:
            if key not in self._prep:
                self._prep[key] = self._build_prep(pipeline, m)
            return self._prep[key]

    def _build_prep(self, pipeline: str, m: int):
        cfg = self.config
        grid = QuantizerGrid(box_side=cfg.box_for(pipeline), n_bins=m)
        pts = self.clean_points(pipeline)
        streams, bits, counts = {}, {}, {}
        probs = cell_probabilities(self.density(pipeline), grid)
        huffman = build_huffman(probs)
        avg_len = huffman.expected_length(probs[huffman.symbols - 1])
        if pipeline == "pd":
            diags = self.diagrams()
            for i in self.unique_test:
                q = quantize_diagram(grid, diags[i],
                                     collapse_duplicates=cfg.collapse_duplicates)
                streams[i] = q
                counts[i] = q.channel_counts
        else:
            for i in self.unique_test:
                q = quantize_set(grid, pts[i], pipeline,
                                 collapse_duplicates=cfg.collapse_duplicates)
                streams[i] = q
                counts[i] = (len(q.indices),)
        for i in self.unique_test:
            bits[i] = huffman_encode(huffman, streams[i].indices)
        lengths = np.array([len(streams[i].indices) for i in self.unique_test],
                           dtype=float)
        by_index = dict(zip(self.unique_test.tolist(), lengths))
        mean_symbols = float(np.mean(
            [by_index[i] for i in self.test_multiset]))
        rate = semantic_rate(quantizer_entropy(probs), pipeline, m,
                             mean_symbols, cell_probs=probs)
        mse = mse_distortion(self.density(pipeline), grid)
        bn = bottleneck_style_distortion(
            [pts[i] for i in self.test_multiset], grid)
        return _CellPrep(grid=grid, streams=streams, bits=bits, counts=counts,
                         huffman=huffman, avg_len=avg_len, rate=rate,
                         mse=mse, bottleneck=bn)


@dataclass
class _CellPrep:
    grid: QuantizerGrid
    streams: dict
    bits: dict
    counts: dict
    huffman: object
    avg_len: float
    rate: object
    mse: float
    bottleneck: float


def _decode_uncoded(ctx, prep, alpha):
    channel = BscChannel(alpha=alpha, seed=ctx.config.channel_seed)
    triples = [(int(ctx.object_ids[i]), prep.bits[i], prep.counts[i])
               for i in ctx.unique_test]
    sent = transmit(channel, pack_objects(triples))
    decoded, wire = {}, {}
    for i, (frame, payload) in zip(ctx.unique_test, sent.payloads()):
        n_symbols = sum(frame.channel_counts)
        decoded[i] = huffman_decode(prep.huffman, payload,
                                    max_symbols=n_symbols, strict=False)
        wire[i] = frame.n_bits + frame.overhead_bits
    return decoded, wire, 0


def _decode_coded(ctx, prep, alpha, code):
    channel = BscChannel(alpha=alpha, seed=ctx.config.channel_seed)
    n, k = code.n, code.k
    decoded, wire = {}, {}
    failures = 0
    for i in ctx.unique_test:
        payload = prep.bits[i]
        oid = int(ctx.object_ids[i])
        overhead = 16 * (1 + len(prep.counts[i]))
        if len(payload) == 0:
            decoded[i] = np.empty(0, dtype=int)
            wire[i] = overhead
            continue
        blocks = int(np.ceil(len(payload) / k))
        padded = np.zeros(blocks * k, dtype=np.uint8)
        padded[:len(payload)] = payload
        words = [bch_encode(code, padded[j * k:(j + 1) * k])
                 for j in range(blocks)]
        received = transmit_bits(channel, np.concatenate(words), key=(oid,))
        pieces = []
        for j in range(blocks):
            msg, _, failed = decode_or_passthrough(
                code, received[j * n:(j + 1) * n])
            failures += int(failed)
            pieces.append(msg)
        out_bits = np.concatenate(pieces)[:len(payload)]
        decoded[i] = huffman_decode(prep.huffman, out_bits,
                                    max_symbols=sum(prep.counts[i]),
                                    strict=False)
        wire[i] = blocks * n + overhead
    return decoded, wire, failures


def _cell_features(ctx, prep, pipeline, decoded):
    cfg = ctx.config
    feats = {}
    for i in ctx.unique_test:
        symbols = decoded[i]
        if pipeline == "pd":
            n0, n1 = prep.counts[i]
            c0 = min(n0, len(symbols))
            c1 = len(symbols) - c0
            from .quantizer import diagram_from_symbols
            diag = diagram_from_symbols(prep.grid, symbols, (c0, c1),
                                        gamma_max=cfg.gamma_max)
            feats[i] = perslay_vectorize(ctx.perslay, diag)
        elif pipeline == "raw":
            centers = (prep.grid.centers_of(symbols) if len(symbols)
                       else np.empty((0, 2)))
            feats[i] = rasterize_raw(centers, box_side=cfg.box_raw)
        else:
            want = len(ctx.clean_points("latent")[i])
            centers = (prep.grid.centers_of(symbols) if len(symbols)
                       else np.empty((0, 2)))
            padded = np.zeros((want, 2))
            padded[:min(want, len(centers))] = centers[:want]
            feats[i] = padded.ravel()
    return feats


def _symbol_error_rate(ctx, prep, decoded) -> float:
    rates = {}
    for i in ctx.unique_test:
        orig = prep.streams[i].indices
        dec = np.asarray(decoded[i], dtype=int)
        n = min(len(orig), len(dec))
        errors = int(np.sum(orig[:n] != dec[:n])) + abs(len(orig) - len(dec))
        rates[i] = errors / max(1, len(orig))
    return float(np.mean([rates[i] for i in ctx.test_multiset]))


def _run_cell(ctx, pipeline, m, alpha, code_spec):
    prep = ctx.prep(pipeline, m)
    if code_spec is None:
        decoded, wire, failures = _decode_uncoded(ctx, prep, alpha)
        label = "none"
    else:
        code = ctx.bch(code_spec)
        decoded, wire, failures = _decode_coded(ctx, prep, alpha, code)
        label = "%d:%d:%d" % code_spec
    feats = _cell_features(ctx, prep, pipeline, decoded)
    fold_accs = []
    for t, (_, test) in enumerate(ctx.schedule.folds):
        X = np.stack([feats[i] for i in test])
        fold_accs.append(evaluate_accuracy(ctx.classifier(pipeline, t),
                                           X, ctx.labels[test]))
    from .inference import AccuracyReport
    report = AccuracyReport.from_folds(fold_accs)
    wire_mean = float(np.mean([wire[i] for i in ctx.test_multiset]))
    huff_mean = float(np.mean(
        [len(prep.bits[i]) for i in ctx.test_multiset]))
    record = TradeoffRecord(
        pipeline=pipeline, m=m, alpha=alpha, code=label, status="ok",
        schedule=ctx.schedule.schedule_hash(), seed=ctx.config.channel_seed,
        entropy_bits=prep.rate.entropy_bits_per_symbol,
        mean_symbols=prep.rate.mean_symbols_per_object,
        rate_cells=prep.rate.rate_bits_per_object,
        rate_selfinfo=prep.rate.self_information_bits_per_object,
        huffman_bits=huff_mean, wire_bits=wire_mean,
        avg_codeword_len=prep.avg_len,
        mse=prep.mse, bottleneck=prep.bottleneck,
        acc_mean=report.mean, band_low=report.band_low,
        band_high=report.band_high, acc_std=report.std,
        symbol_error_rate=_symbol_error_rate(ctx, prep, decoded),
        decode_failures=failures)
    return record, report


def _error_record(ctx, pipeline, m, alpha, label, exc) -> TradeoffRecord:
    nan = float("nan")
    return TradeoffRecord(
        pipeline=pipeline, m=m, alpha=alpha, code=label, status="error",
        schedule=ctx.schedule.schedule_hash(), seed=ctx.config.channel_seed,
        entropy_bits=nan, mean_symbols=nan, rate_cells=nan, rate_selfinfo=nan,
        huffman_bits=nan, wire_bits=nan, avg_codeword_len=nan, mse=nan,
        bottleneck=nan, acc_mean=nan, band_low=nan, band_high=nan,
        acc_std=nan, symbol_error_rate=nan, decode_failures=0,
        error=f"{type(exc).__name__}: {exc}")


def folds_path_for(out_path: str) -> str:
    stem, ext = os.path.splitext(out_path)
    return stem + "_folds" + (ext or ".csv")


def run_sweep(config: ExperimentConfig, progress: bool = False):
    """Full factorial over (pipeline, m, alpha, code); resumable by key.

    Returns the complete record list, previously finished cells included.
    The results file gets one row per cell under a config-hash header; a
    sibling *_folds.csv holds per-repetition accuracies.
    """
    ctx = _SweepContext(config)
    code_specs = [None] + list(config.codes)
    cells = [(p, m, a, c) for p in config.pipelines for m in config.m_values
             for a in config.alphas for c in code_specs]

    done, existing = {}, []
    header_needed = True
    if os.path.exists(config.out):
        file_hash, existing = read_results(config.out)
        if file_hash != config.config_hash():
            raise ValueError(
                f"results file {config.out!r} was produced by a different "
                f"configuration (hash {file_hash})")
        done = {r.key: r for r in existing}
        header_needed = False

    folds_path = folds_path_for(config.out)
    ctx.warm()

    def compute(cell):
        pipeline, m, alpha, spec = cell
        label = "none" if spec is None else "%d:%d:%d" % spec
        key = (pipeline, m, _fmt(alpha), label)
        if key in done:
            return key, None, None
        try:
            record, report = _run_cell(ctx, pipeline, m, alpha, spec)
            return key, record, report
        except (PipelineError, ValueError) as exc:
            return key, _error_record(ctx, pipeline, m, alpha, label, exc), None

    records = list(existing)
    failed = []
    out_f = open(config.out, "a", newline="")
    folds_f = open(folds_path, "a", newline="")
    try:
        if header_needed:
            out_f.write("# config_hash=%s\n" % config.config_hash())
            out_f.write(",".join(COLUMNS) + "\n")
            out_f.flush()
        if folds_f.tell() == 0:
            folds_f.write("pipeline,m,alpha,code,t,accuracy\n")
            folds_f.flush()
        out_w = csv.writer(out_f, lineterminator="\n")
        folds_w = csv.writer(folds_f, lineterminator="\n")
        if config.workers > 1:
            pool = ThreadPoolExecutor(max_workers=config.workers)
            results = list(pool.map(compute, cells))
            pool.shutdown()
        else:
            results = map(compute, cells)
        for idx, (key, record, report) in enumerate(results):
            if record is None:
                if progress:
                    print(f"[{idx + 1}/{len(cells)}] {key} already done")
                continue
            records.append(record)
            out_w.writerow(record.to_row())
            out_f.flush()
            if report is not None:
                for t, acc in enumerate(report.per_fold):
                    folds_w.writerow([record.pipeline, record.m,
                                      _fmt(record.alpha), record.code, t,
                                      _fmt(acc)])
                folds_f.flush()
            if record.status == "error":
                failed.append((key, record.error))
            if progress:
                tail = (f"acc={record.acc_mean:.4f}"
                        if record.status == "ok" else record.error)
                print(f"[{idx + 1}/{len(cells)}] {key} {tail}")
    finally:
        out_f.close()
        folds_f.close()
    if progress and failed:
        print(f"{len(failed)} cell(s) failed:")
        for key, err in failed:
            print(f"  {key}: {err}")
    return records


# ---------------------------------------------------------------------------
# curve emission

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _svg_chart(series, x_label, y_label, title, bands=None, vlines=None,
               log_x=False):
    """Hand-rolled line chart. series: [(name, xs, ys)]; bands aligned with
    series as (lo, hi) arrays or None; vlines: [(label, x)]."""
    width, height = 640, 440
    ml, mr, mt, mb = 64, 16, 28, 48
    pw, ph = width - ml - mr, height - mt - mb
    xs_all = np.concatenate([np.asarray(xs, dtype=float)
                             for _, xs, _ in series])
    if vlines:
        xs_all = np.concatenate([xs_all, [x for _, x in vlines]])
    ys_all = [np.asarray(ys, dtype=float) for _, _, ys in series]
    if bands:
        ys_all += [np.asarray(b, dtype=float) for pair in bands if pair
                   for b in pair]
    ys_all = np.concatenate(ys_all)
    if log_x:
        xs_all = np.log10(xs_all)
    x_lo, x_hi = float(np.min(xs_all)), float(np.max(xs_all))
    y_lo, y_hi = float(np.min(ys_all)), float(np.max(ys_all))
    if x_hi - x_lo < 1e-12:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi - y_lo < 1e-12:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad_y = 0.06 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad_y, y_hi + pad_y

    def px(x):
        v = math.log10(x) if log_x else x
        return ml + pw * (v - x_lo) / (x_hi - x_lo)

    def py(y):
        return mt + ph * (1 - (y - y_lo) / (y_hi - y_lo))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
           f'height="{height}" viewBox="0 0 {width} {height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.0f}" y="18" text-anchor="middle" '
           f'font-family="sans-serif" font-size="14">{title}</text>']
    # axes box
    out.append(f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" '
               f'fill="none" stroke="#333"/>')
    if log_x:
        ticks = [m * 10.0 ** e
                 for e in range(int(math.floor(x_lo)) - 1,
                                int(math.ceil(x_hi)) + 1)
                 for m in (1, 2, 5)
                 if x_lo <= math.log10(m * 10.0 ** e) <= x_hi]
        if not ticks:
            ticks = [10.0 ** x_lo, 10.0 ** x_hi]
    else:
        ticks = np.linspace(x_lo, x_hi, 5).tolist()
    for tx in ticks:
        x = px(tx)
        label = "%.3g" % tx
        out.append(f'<line x1="{x:.1f}" y1="{mt + ph}" x2="{x:.1f}" '
                   f'y2="{mt + ph + 4}" stroke="#333"/>')
        out.append(f'<text x="{x:.1f}" y="{mt + ph + 18}" '
                   f'text-anchor="middle" font-family="sans-serif" '
                   f'font-size="11">{label}</text>')
    for ty in np.linspace(y_lo, y_hi, 5):
        y = py(ty)
        out.append(f'<line x1="{ml - 4}" y1="{y:.1f}" x2="{ml}" y2="{y:.1f}" '
                   f'stroke="#333"/>')
        out.append(f'<text x="{ml - 8}" y="{y + 4:.1f}" text-anchor="end" '
                   f'font-family="sans-serif" font-size="11">'
                   f'{"%.3g" % ty}</text>')
    out.append(f'<text x="{ml + pw / 2:.0f}" y="{height - 10}" '
               f'text-anchor="middle" font-family="sans-serif" '
               f'font-size="12">{x_label}</text>')
    out.append(f'<text x="16" y="{mt + ph / 2:.0f}" text-anchor="middle" '
               f'font-family="sans-serif" font-size="12" '
               f'transform="rotate(-90 16 {mt + ph / 2:.0f})">{y_label}</text>')
    for v_idx, (name, x) in enumerate(vlines or []):
        xp = px(x)
        out.append(f'<line x1="{xp:.1f}" y1="{mt}" x2="{xp:.1f}" '
                   f'y2="{mt + ph}" stroke="#666" stroke-dasharray="4 3"/>')
        out.append(f'<text x="{xp + 3:.1f}" y="{mt + 12 + 12 * v_idx}" '
                   f'font-family="sans-serif" font-size="10" '
                   f'fill="#666">{name}</text>')
    for s_idx, (name, xs, ys) in enumerate(series):
        color = _PALETTE[s_idx % len(_PALETTE)]
        if bands and bands[s_idx]:
            lo, hi = bands[s_idx]
            ring = ([(px(x), py(v)) for x, v in zip(xs, hi)] +
                    [(px(x), py(v)) for x, v in zip(xs[::-1], lo[::-1])])
            pts = " ".join(f"{x:.1f},{y:.1f}" for x, y in ring)
            out.append(f'<polygon points="{pts}" fill="{color}" '
                       f'fill-opacity="0.15" stroke="none"/>')
        pts = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys))
        out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                   f'stroke-width="1.8"/>')
        for x, y in zip(xs, ys):
            out.append(f'<circle cx="{px(x):.1f}" cy="{py(y):.1f}" r="2.4" '
                       f'fill="{color}"/>')
        ly = mt + 14 + 14 * s_idx
        lx = ml + pw - 150
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 22}" '
                   f'y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{lx + 27}" y="{ly}" font-family="sans-serif" '
                   f'font-size="11">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_curves(records, kind: str, out_dir) -> tuple:
    """Write <kind>.csv and <kind>.svg under out_dir; returns both paths.

    dr: distortion vs rate; ad: accuracy vs distortion; ar: accuracy vs
    rate (all at the perfect-channel uncoded cells); ar-coded: accuracy vs
    transmitted wire bits for noisy or coded cells, with dotted vertical
    reference lines at each pipeline's perfect-channel rate.
    """
    if kind not in CURVE_KINDS:
        raise ValueError(f"unknown curve kind {kind!r}")
    records = [r for r in records if r.status == "ok"]
    if not records:
        raise ValueError("no successful records to plot")
    os.makedirs(out_dir, exist_ok=True)
    csv_path = os.path.join(out_dir, f"{kind}.csv")
    svg_path = os.path.join(out_dir, f"{kind}.svg")
    pipelines = [p for p in PIPELINE_KINDS
                 if any(r.pipeline == p for r in records)]

    def base_rows(pipeline):
        rows = [r for r in records
                if r.pipeline == pipeline and r.alpha == 0.0
                and r.code == "none"]
        return sorted(rows, key=lambda r: r.m)

    series, bands, vlines = [], [], None
    with open(csv_path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        if kind == "dr":
            w.writerow(["pipeline", "m", "rate_selfinfo", "rate_cells",
                        "mse", "bottleneck"])
            for p in pipelines:
                rows = base_rows(p)
                if not rows:
                    print(f"warning: no perfect-channel rows for {p!r}, "
                          f"curve omitted")
                    continue
                for r in rows:
                    w.writerow([p, r.m, _fmt(r.rate_selfinfo),
                                _fmt(r.rate_cells), _fmt(r.mse),
                                _fmt(r.bottleneck)])
                series.append((p, [r.rate_selfinfo for r in rows],
                               [r.mse for r in rows]))
                bands.append(None)
            chart_args = ("rate (bits/object)", "mean squared distortion",
                          "distortion vs rate", True)
        elif kind == "ad":
            w.writerow(["pipeline", "m", "mse", "acc_mean", "band_low",
                        "band_high", "acc_std"])
            for p in pipelines:
                rows = base_rows(p)
                if not rows:
                    print(f"warning: no perfect-channel rows for {p!r}, "
                          f"curve omitted")
                    continue
                rows = sorted(rows, key=lambda r: r.mse)
                for r in rows:
                    w.writerow([p, r.m, _fmt(r.mse), _fmt(r.acc_mean),
                                _fmt(r.band_low), _fmt(r.band_high),
                                _fmt(r.acc_std)])
                series.append((p, [r.mse for r in rows],
                               [r.acc_mean for r in rows]))
                bands.append(([r.band_low for r in rows],
                              [r.band_high for r in rows]))
            chart_args = ("mean squared distortion", "accuracy",
                          "accuracy vs distortion", False)
        elif kind == "ar":
            w.writerow(["pipeline", "m", "rate_selfinfo", "acc_mean",
                        "band_low", "band_high", "acc_std"])
            for p in pipelines:
                rows = base_rows(p)
                if not rows:
                    print(f"warning: no perfect-channel rows for {p!r}, "
                          f"curve omitted")
                    continue
                rows = sorted(rows, key=lambda r: r.rate_selfinfo)
                for r in rows:
                    w.writerow([p, r.m, _fmt(r.rate_selfinfo),
                                _fmt(r.acc_mean), _fmt(r.band_low),
                                _fmt(r.band_high), _fmt(r.acc_std)])
                series.append((p, [r.rate_selfinfo for r in rows],
                               [r.acc_mean for r in rows]))
                bands.append(([r.band_low for r in rows],
                              [r.band_high for r in rows]))
            chart_args = ("rate (bits/object)", "accuracy",
                          "accuracy vs rate", True)
        else:  # ar-coded
            w.writerow(["pipeline", "code", "alpha", "m", "wire_bits",
                        "acc_mean", "band_low", "band_high"])
            vlines = []
            for p in pipelines:
                base = base_rows(p)
                if base:
                    ref = min(base, key=lambda r: r.m)
                    vlines.append((f"{p} rate", ref.rate_selfinfo))
                groups = {}
                for r in records:
                    if r.pipeline != p:
                        continue
                    if r.alpha == 0.0 and r.code == "none":
                        continue
                    groups.setdefault((r.code, r.alpha), []).append(r)
                if not groups:
                    print(f"warning: no coded or noisy rows for {p!r}, "
                          f"curve omitted")
                    continue
                for (code, alpha), rows in sorted(groups.items()):
                    rows = sorted(rows, key=lambda r: r.wire_bits)
                    for r in rows:
                        w.writerow([p, code, _fmt(alpha), r.m,
                                    _fmt(r.wire_bits), _fmt(r.acc_mean),
                                    _fmt(r.band_low), _fmt(r.band_high)])
                    name = f"{p} {code} a={_fmt(alpha)}"
                    series.append((name, [r.wire_bits for r in rows],
                                   [r.acc_mean for r in rows]))
                    bands.append(None)
            chart_args = ("transmitted bits/object", "accuracy",
                          "accuracy vs coded rate", True)
    if not series:
        raise ValueError("no records matched the requested curve kind")
    x_label, y_label, title, log_x = chart_args
    chart = _svg_chart(series, x_label, y_label, title, bands=bands,
                       vlines=vlines, log_x=log_x)
    with open(svg_path, "w") as f:
        f.write(chart)
    return csv_path, svg_path
