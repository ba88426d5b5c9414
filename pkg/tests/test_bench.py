import csv
import io
import random

import pytest

from kase import bench
from kase.errors import ParameterError
from kase.scheme import keygen, setup


@pytest.mark.parametrize("algorithm", bench.ALGORITHMS)
@pytest.mark.parametrize("construction", bench.CONSTRUCTIONS)
def test_every_sweep_runs(algorithm, construction):
    values = [1, 2] if algorithm != "setup" else [2, 3]
    records = bench.bench_sweep(algorithm, construction, values, reps=10, warmup=0, rng=random.Random(1))
    assert [r.value for r in records] == values
    for r in records:
        assert r.reps == 10 and r.axis == bench.AXES[algorithm]
        assert 0 < r.p10_us <= r.median_us <= r.p90_us


@pytest.mark.parametrize("kwargs", [
    dict(algorithm="sort"),
    dict(construction="third"),
    dict(reps=9),
    dict(values=[]),
    dict(values=[3, 2]),
    dict(values=[2, 2]),
    dict(values=[0, 1]),
    dict(algorithm="extract", values=[1, 70000]),
    dict(inner=0),
])
def test_sweep_validation(kwargs):
    args = dict(algorithm="trapdoor", construction="first", values=[1, 2], reps=10)
    args.update(kwargs)
    with pytest.raises(ParameterError):
        bench.bench_sweep(**args)


def test_csv_schema():
    records = bench.bench_sweep("trapdoor", "main", [1, 2], reps=10, warmup=0)
    out = io.StringIO()
    bench.write_csv(records, out)
    rows = list(csv.reader(io.StringIO(out.getvalue())))
    assert rows[0] == ["construction", "algorithm", "axis", "value", "median_us", "p10_us", "p90_us", "reps"]
    assert rows[1][:4] == ["main", "trapdoor", "n", "1"] and rows[1][-1] == "10"


def test_linear_fit_exact():
    slope, intercept, r2 = bench.linear_fit([1, 2, 3, 4], [5, 7, 9, 11])
    assert (slope, intercept) == pytest.approx((2, 3))
    assert r2 == pytest.approx(1.0)


def _rec(v, t):
    return bench.BenchRecord("first", "x", "n", v, t, t, t, 10)


def test_flatness():
    assert bench.flatness([_rec(1, 10), _rec(2, 10), _rec(3, 10)]) == 0
    assert bench.flatness([_rec(1, 10), _rec(2, 20), _rec(3, 30)]) == pytest.approx(1.0)


def test_size_report_matches_symbolic_units():
    records = bench.size_report((2, 8), random.Random(3))
    assert all(r.bytes == r.symbolic_bytes for r in records)
    by_kind = {}
    for r in records:
        by_kind.setdefault((r.kind, r.construction), set()).add(r.bytes)
    assert by_kind[("aggregate-key", "first")] == {48}
    assert by_kind[("trapdoor", "first")] == {48}
    assert by_kind[("trapdoor", "main")] == {48 + 64}
    assert by_kind[("trapdoor-main-view", "main")] == {80}
    assert by_kind[("trapdoor-aid-view", "main")] == {32}
    assert by_kind[("encrypted-keyword", "main")] == {96 + 48 + 576}


def test_time_search_e2e_agrees_across_constructions():
    r = random.Random(4)
    params = setup(4, r)
    sk = keygen(params, r)
    words = bench.sample_keywords(12, r)
    store = bench.build_store(params, sk, words, r)
    hit = words[5]
    _, a = bench.time_search_e2e("first", params, sk, store, hit, r)
    _, b = bench.time_search_e2e("main", params, sk, store, hit, r)
    assert a == b == (5 % 4 + 1,)
    with pytest.raises(ParameterError):
        bench.time_search_e2e("third", params, sk, store, hit, r)
