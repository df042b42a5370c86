import json

import pytest

from planar_sps.verify import (
    CheckReport,
    build_corpus,
    format_table,
    hard_failures,
    report_json,
    run_suite,
)


@pytest.fixture(scope="module")
def reports():
    return run_suite(corpus_seed=42, n=128)


def test_empty_corpus_gives_empty_report():
    assert len(build_corpus(size=0)) == 0
    assert run_suite(corpus_size=0) == []


def test_corpus_is_deterministic():
    a = build_corpus(seed=3, n=64)
    b = build_corpus(seed=3, n=64)
    assert a.labels == b.labels
    for u, v in zip(a.fields, b.fields):
        assert (u.values == v.values).all()


def test_default_corpus_has_no_hard_failures(reports):
    assert reports
    assert hard_failures(reports) == [], format_table(hard_failures(reports))


def test_reports_sorted_and_well_formed(reports):
    ids = [r.check_id for r in reports]
    assert ids == sorted(ids)
    assert len(set(ids)) == len(ids)
    for r in reports:
        assert isinstance(r, CheckReport)
        assert r.status in {"pass", "fail", "report-only", "skipped"}
        assert r.anchor


def test_same_seed_same_json(reports):
    again = run_suite(corpus_seed=42, n=128, workers=1)
    assert report_json(again) == report_json(reports)
    json.loads(report_json(reports))


def test_table_has_one_line_per_check(reports):
    assert len(format_table(reports).splitlines()) == len(reports)
    assert format_table([]) == ""
