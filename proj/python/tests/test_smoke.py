import json
import os
import re

import pytest

import gigaudit


@pytest.fixture(scope="module")
def fixture(tmp_path_factory):
    out = tmp_path_factory.mktemp("gen")
    truth = gigaudit.generate(
        {"seed": 3, "n_drivers": 3, "months": "2021-12:2023-03", "active_day_probability": 0.3}, out
    )
    return out, truth


def test_era_of():
    assert gigaudit.era_of("2021-06") == "fixed_commission"
    assert gigaudit.era_of("2022-02") == "opaque_gap"
    assert gigaudit.era_of("2023-02") == "dynamic_pricing"


def test_pseudonym():
    salt = "0123456789abcdef0123"
    p = gigaudit.pseudonym("driver_0001", salt)
    assert re.fullmatch(r"[0-9a-f]{16}", p)
    assert p == gigaudit.pseudonym("driver_0001", salt)
    assert p != gigaudit.pseudonym("driver_0001", salt + "!")
    with pytest.raises(gigaudit.AuditError):
        gigaudit.pseudonym("driver_0001", "short")


def test_generate_and_audit(fixture):
    out, truth = fixture
    assert len(truth["drivers"]) == 3
    report = gigaudit.audit_report(out / "bundles")
    assert report["meta"]["bundles_processed"] == 3
    assert report["linkage"]["unmatched_payments"] == 0
    assert report["take_rates"]["histogram"]["bins"]


def test_commands(fixture, tmp_path, monkeypatch):
    out, _ = fixture
    assert gigaudit.cmd_audit(out / "bundles", tmp_path / "audit") == 0
    assert json.loads((tmp_path / "audit" / "audit_report.json").read_text())["meta"]
    assert gigaudit.cmd_predict(out / "bundles", tmp_path / "pred") == 0
    assert (tmp_path / "pred" / "year_matrix_single_year.csv").exists()
    assert gigaudit.cmd_audit(tmp_path / "missing", tmp_path / "x") == 3

    monkeypatch.delenv(gigaudit.SALT_ENV_VAR, raising=False)
    assert gigaudit.cmd_anon(out / "bundles", tmp_path / "anon") == 4
    monkeypatch.setenv(gigaudit.SALT_ENV_VAR, "an-environment-salt-value")
    assert gigaudit.cmd_anon(out / "bundles", tmp_path / "anon") == 0
    names = sorted(os.listdir(tmp_path / "anon"))
    assert len(names) == 3
    for root, _, files in os.walk(tmp_path / "anon"):
        for f in files:
            with open(os.path.join(root, f), "rb") as fh:
                assert gigaudit.PII_MARKER.encode() not in fh.read()


def test_fit_ols():
    xs = [[float(i), float(i * i % 7)] for i in range(50)]
    ys = [3.0 * a - 2.0 * b + 1.0 for a, b in xs]
    fit = gigaudit.fit_ols(xs, ys)
    assert fit["coefficients"] == pytest.approx([3.0, -2.0], abs=1e-6)
    assert fit["intercept"] == pytest.approx(1.0, abs=1e-6)
    assert fit["training_r2"] == pytest.approx(1.0)
    assert gigaudit.r2_score([1.0, 2.0, 3.0], [2.0, 2.0, 2.0]) == 0.0
