"""Shared fixtures: a synthetic dataset and a fully built snapshot directory."""

from __future__ import annotations

import csv
from datetime import date
from pathlib import Path

import pytest

from bedcast import pipeline
from bedcast.cli import synthetic_admissions


def write_admissions_csv(path: Path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["site_id", "admit_date", "los_days"])
        w.writerows(rows)


@pytest.fixture(scope="session")
def synthetic_csv(tmp_path_factory) -> Path:
    """Two lognormal-LOS sites over ~2 years, seeded."""
    path = tmp_path_factory.mktemp("data") / "admissions.csv"
    rows = synthetic_admissions(
        n_sites=2, days=750, seed=7, start_date=date(2020, 1, 1), los_family="lognormal"
    )
    write_admissions_csv(path, rows)
    return path


@pytest.fixture(scope="session")
def snapshot_dir(tmp_path_factory, synthetic_csv) -> Path:
    """One pipeline run (ingest through plan) shared across test modules."""
    out = tmp_path_factory.mktemp("snapshot")
    config = pipeline.load_config(None)
    pipeline.run_all(synthetic_csv, out, config)
    return out


@pytest.fixture(scope="session")
def exponential_snapshot_dir(tmp_path_factory) -> Path:
    """A snapshot whose sites fit exponential LOS (for family-restriction tests)."""
    data = tmp_path_factory.mktemp("expdata") / "admissions.csv"
    rows = synthetic_admissions(
        n_sites=1, days=750, seed=11, start_date=date(2020, 1, 1), los_family="exponential"
    )
    write_admissions_csv(data, rows)
    out = tmp_path_factory.mktemp("expsnap")
    pipeline.run_all(data, out, pipeline.load_config(None))
    return out
