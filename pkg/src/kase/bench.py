"""Timing sweeps, storage sizes and the end-to-end search timer.

Timings are wall-clock medians over at least 10 repetitions after warmup
runs, single-threaded. Only the shape of the curves and the ratio between
constructions carry meaning; absolute numbers depend on the machine.
"""

from __future__ import annotations

import csv
import gc
import math
import random
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence, TextIO

from . import backbone as bb
from . import first
from . import main_scheme as ms
from .errors import ParameterError
from .harness.messages import AidHalf, FirstRequest, MainHalf, new_query_id
from .harness.servers import AidServer, FirstServer, MainServer
from .harness.store import IndexStore
from .scheme import (
    MAX_DOCUMENTS,
    PublicParams,
    SecretKey,
    encrypt,
    extract,
    keygen,
    set_product,
    setup,
)

ALGORITHMS = ("setup", "encrypt", "extract", "trapdoor", "adjust", "test", "search-e2e")
CONSTRUCTIONS = ("first", "main")
AXES = {
    "setup": "n",
    "encrypt": "keywords",
    "extract": "S",
    "trapdoor": "n",
    "adjust": "S",
    "test": "keywords",
    "search-e2e": "keywords",
}
CSV_FIELDS = ("construction", "algorithm", "axis", "value", "median_us", "p10_us", "p90_us", "reps")
MIN_REPS = 10

# fixed shape for sweeps whose axis is not n
FIXTURE_DOCS = 16
FIXTURE_SET = (1, 2, 3, 4)


@dataclass(frozen=True)
class BenchRecord:
    construction: str
    algorithm: str
    axis: str
    value: int
    median_us: float
    p10_us: float
    p90_us: float
    reps: int

    def row(self) -> dict:
        return asdict(self)


def sample_keywords(count: int, rng: random.Random) -> list[str]:
    """``count`` distinct pseudo-words."""
    words: set[str] = set()
    while len(words) < count:
        words.add("kw" + "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(6)))
    return sorted(words)


def build_store(params: PublicParams, sk: SecretKey, keywords: Sequence[str], rng=None) -> IndexStore:
    """Encrypt ``keywords`` round-robin over documents 1..n."""
    per_doc: dict[int, list] = {}
    for k, w in enumerate(keywords):
        i = k % params.n + 1
        per_doc.setdefault(i, []).append(encrypt(params, sk, i, w, rng))
    store = IndexStore(params)
    for i, cts in sorted(per_doc.items()):
        store.upload(i, cts)
    return store


def search_e2e_first(params: PublicParams, store: IndexStore, td: first.TrapdoorFirst, docs) -> tuple[int, ...]:
    """Server-side work of one single-server search, without serialization."""
    return FirstServer(params, store).search(FirstRequest(new_query_id(), tuple(docs), td.tr))


def search_e2e_main(params: PublicParams, store: IndexStore, bundle: ms.TrapdoorBundle, docs) -> tuple[int, ...]:
    """Server-side work of one two-server search: the aid batch, then the main recombination."""
    qid = new_query_id()
    s = tuple(docs)
    batch = AidServer(params, store).compute_batch(AidHalf(qid, s, bundle.r_aid))
    return MainServer(params, store).search(MainHalf(qid, s, bundle.tr, bundle.r_main), batch)


def time_search_e2e(
    construction: str,
    params: PublicParams,
    sk: SecretKey,
    store: IndexStore,
    keyword: str,
    rng=None,
) -> tuple[float, tuple[int, ...]]:
    """Seconds for one search over every document in ``store``, and its result."""
    s = tuple(range(1, params.n + 1))
    agg = extract(params, sk, s)
    if construction == "first":
        td = first.trapdoor(params, agg, s, keyword)
        start = time.perf_counter()
        docs = search_e2e_first(params, store, td, s)
    elif construction == "main":
        bundle = ms.trapdoor_main(params, agg, s, keyword, rng)
        start = time.perf_counter()
        docs = search_e2e_main(params, store, bundle, s)
    else:
        raise ParameterError(f"unknown construction {construction!r}")
    return time.perf_counter() - start, docs


# ---------------------------------------------------------------------------
# sweeps

def _check_sweep(algorithm: str, construction: str, values: Sequence[int], reps: int) -> None:
    if algorithm not in ALGORITHMS:
        raise ParameterError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if construction not in CONSTRUCTIONS:
        raise ParameterError(f"unknown construction {construction!r}")
    if reps < MIN_REPS:
        raise ParameterError(f"need at least {MIN_REPS} repetitions, got {reps}")
    if not values:
        raise ParameterError("sweep needs at least one axis value")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ParameterError("axis values must be strictly increasing")
    if values[0] < 1:
        raise ParameterError("axis values must be positive")
    if AXES[algorithm] in ("n", "S") and values[-1] > MAX_DOCUMENTS:
        raise ParameterError(f"axis value {values[-1]} exceeds the document cap {MAX_DOCUMENTS}")


class _Fixtures:
    """Key material shared by every point of one sweep, built outside the timed region."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self._params: dict[int, tuple[PublicParams, SecretKey]] = {}

    def keys(self, n: int) -> tuple[PublicParams, SecretKey]:
        if n not in self._params:
            params = setup(n, self.rng)
            self._params[n] = (params, keygen(params, self.rng))
        return self._params[n]


def _workload(algorithm: str, construction: str, value: int, top: int, fx: _Fixtures) -> Callable[[], object]:
    rng = fx.rng
    if algorithm == "setup":
        return lambda: setup(value, rng)

    if algorithm == "encrypt":
        params, sk = fx.keys(FIXTURE_DOCS)
        words = sample_keywords(value, rng)
        return lambda: [encrypt(params, sk, 1, w, rng) for w in words]

    if algorithm == "extract":
        params, sk = fx.keys(top)
        s = tuple(range(1, value + 1))
        return lambda: extract(params, sk, s)

    if algorithm == "trapdoor":
        params, sk = fx.keys(value)
        s = (1,)
        agg = extract(params, sk, s)
        if construction == "first":
            return lambda: first.trapdoor(params, agg, s, "needle")
        return lambda: ms.trapdoor_main(params, agg, s, "needle", rng)

    if algorithm == "adjust":
        params, sk = fx.keys(top)
        s = tuple(range(1, value + 1))
        agg = extract(params, sk, s)
        if construction == "first":
            td = first.trapdoor(params, agg, s, "needle")
            return lambda: first.adjust(params, 1, s, td)
        bundle = ms.trapdoor_main(params, agg, s, "needle", rng)

        def adjust_both():
            share_aid = ms.adjust_share(params, 1, s, bundle.r_aid)
            share_main = ms.adjust_share(params, 1, s, bundle.r_main)
            return ms.adjust_main(params, 1, s, bundle.tr, share_main, share_aid)
        return adjust_both

    params, sk = fx.keys(FIXTURE_DOCS)
    if algorithm == "test":
        s = FIXTURE_SET
        agg = extract(params, sk, s)
        cts = [encrypt(params, sk, 1, w, rng) for w in sample_keywords(value, rng)]
        pub = set_product(params, s)
        if construction == "first":
            tr_i = first.adjust(params, 1, s, first.trapdoor(params, agg, s, "needle"))
            return lambda: [first.test(params, tr_i, s, c, pub) for c in cts]
        bundle = ms.trapdoor_main(params, agg, s, "needle", rng)
        tr_i = ms.adjust_main(params, 1, s, bundle.tr,
                              ms.adjust_share(params, 1, s, bundle.r_main),
                              ms.adjust_share(params, 1, s, bundle.r_aid))

        def test_all():
            out = []
            for c in cts:
                aid = ms.test_shares(params, s, c, bundle.r_aid, pub)
                mine = ms.test_shares(params, s, c, bundle.r_main, pub)
                out.append(ms.test_main(params, tr_i, s, c, mine, aid))
            return out
        return test_all

    # search-e2e
    store = build_store(params, sk, sample_keywords(value, rng), rng)
    s = tuple(range(1, params.n + 1))
    agg = extract(params, sk, s)
    if construction == "first":
        td = first.trapdoor(params, agg, s, "needle")
        return lambda: search_e2e_first(params, store, td, s)
    bundle = ms.trapdoor_main(params, agg, s, "needle", rng)
    return lambda: search_e2e_main(params, store, bundle, s)


def _summary(samples: list[float]) -> tuple[float, float, float]:
    deciles = statistics.quantiles(samples, n=10, method="inclusive")
    return statistics.median(samples), deciles[0], deciles[-1]


def bench_sweep(
    algorithm: str,
    construction: str = "first",
    values: Iterable[int] = (),
    reps: int = MIN_REPS,
    warmup: int = 3,
    *,
    inner: int = 1,
    rng: random.Random | None = None,
) -> list[BenchRecord]:
    """Time ``algorithm`` at each axis value.

    Repetitions are interleaved across axis values (one round visits every
    value) so that a burst of machine noise hits all points alike. Each
    repetition runs the workload ``inner`` times and records the mean, which
    smooths timer noise for sub-millisecond operations.
    """
    values = list(values)
    _check_sweep(algorithm, construction, values, reps)
    if inner < 1:
        raise ParameterError("inner must be >= 1")
    fx = _Fixtures(rng or random.Random())
    top = values[-1]
    work = {v: _workload(algorithm, construction, v, top, fx) for v in values}
    samples: dict[int, list[float]] = {v: [] for v in values}
    gc_was_enabled = gc.isenabled()
    gc.disable()
    try:
        for round_ in range(warmup + reps):
            for v in values:
                start = time.perf_counter()
                for _ in range(inner):
                    work[v]()
                if round_ >= warmup:
                    samples[v].append((time.perf_counter() - start) / inner * 1e6)
    finally:
        if gc_was_enabled:
            gc.enable()
    records = []
    for v in values:
        med, p10, p90 = _summary(samples[v])
        records.append(BenchRecord(construction, algorithm, AXES[algorithm], v, med, p10, p90, reps))
    return records


def write_csv(records: Iterable[BenchRecord], out: TextIO) -> None:
    writer = csv.DictWriter(out, fieldnames=CSV_FIELDS, lineterminator="\n")
    writer.writeheader()
    for r in records:
        row = r.row()
        for k in ("median_us", "p10_us", "p90_us"):
            row[k] = f"{row[k]:.1f}"
        writer.writerow(row)


# ---------------------------------------------------------------------------
# curve shape

def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least squares (slope, intercept, R^2); R^2 is NaN when ``ys`` is constant."""
    slope, intercept = statistics.linear_regression(xs, ys)
    mean = statistics.fmean(ys)
    ss_tot = math.fsum((y - mean) ** 2 for y in ys)
    ss_res = math.fsum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    r2 = 1 - ss_res / ss_tot if ss_tot else math.nan
    return slope, intercept, r2


def fit_records(records: Sequence[BenchRecord]) -> tuple[float, float, float]:
    return linear_fit([r.value for r in records], [r.median_us for r in records])


def flatness(records: Sequence[BenchRecord]) -> float:
    """Change predicted by the fitted line across the axis range, relative to the mean.

    0 means perfectly flat. A linear-cost algorithm gives values near 1 or more.
    """
    xs = [r.value for r in records]
    slope, _ = statistics.linear_regression(xs, [r.median_us for r in records])
    mean = statistics.fmean(r.median_us for r in records)
    return abs(slope) * (max(xs) - min(xs)) / mean


# ---------------------------------------------------------------------------
# storage

UNIT_BYTES = {
    "G": bb.ENCODING["G"],
    "H": bb.ENCODING["H"],
    "GT": bb.ENCODING["GT"],
    "Zp": bb.ENCODING["scalar"],
}


@dataclass(frozen=True)
class SizeRecord:
    kind: str
    construction: str
    n: int
    set_size: int | None
    bytes: int
    symbolic: dict
    note: str = ""

    @property
    def symbolic_bytes(self) -> int:
        return sum(UNIT_BYTES[u] * k for u, k in self.symbolic.items())

    def to_json(self) -> dict:
        return {**asdict(self), "symbolic_bytes": self.symbolic_bytes}


_CT_NOTE = "symmetric-pairing count 2|G|+|GT|; on an asymmetric curve c1 lives in H"


def size_report(ns: Iterable[int] = (2, 8, 64, 512), rng: random.Random | None = None) -> list[SizeRecord]:
    rng = rng or random.Random()
    records = []
    for n in ns:
        params = setup(n, rng)
        sk = keygen(params, rng)
        c = encrypt(params, sk, 1, "needle", rng)
        for construction in CONSTRUCTIONS:
            records.append(SizeRecord("encrypted-keyword", construction, n, None, len(c.to_bytes()),
                                      {"H": 1, "G": 1, "GT": 1}, _CT_NOTE))
        for size in sorted({1, max(1, n // 2), n}):
            s = tuple(range(1, size + 1))
            agg = extract(params, sk, s)
            bundle = ms.trapdoor_main(params, agg, s, "needle", rng)
            for construction in CONSTRUCTIONS:
                records.append(SizeRecord("aggregate-key", construction, n, size, len(agg.to_bytes()), {"G": 1}))
            records += [
                SizeRecord("trapdoor", "first", n, size,
                           len(first.trapdoor(params, agg, s, "needle").to_bytes()), {"G": 1}),
                SizeRecord("trapdoor", "main", n, size, len(bundle.to_bytes()), {"G": 1, "Zp": 2}),
                SizeRecord("trapdoor-main-view", "main", n, size,
                           len(bb.encode_g(bundle.tr) + bb.encode_scalar(bundle.r_main)), {"G": 1, "Zp": 1}),
                SizeRecord("trapdoor-aid-view", "main", n, size,
                           len(bb.encode_scalar(bundle.r_aid)), {"Zp": 1}),
            ]
    return records
