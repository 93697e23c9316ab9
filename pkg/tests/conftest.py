"""Shared fixtures for rm-sieve tests."""

import pytest

from rmsieve.algebra.galois import field_spec
from rmsieve.sensing.frame import FrameSpec


@pytest.fixture(autouse=True)
def _isolate_run_journal(tmp_path, monkeypatch):
    """Redirect runs/ to a temp dir so tests don't pollute the repo."""
    import rmsieve.reports.audit as audit_mod

    runs = tmp_path / "runs"
    runs.mkdir()
    monkeypatch.setattr(audit_mod, "RUNS_DIR", runs)
    monkeypatch.delenv("RM_SIEVE_THREADS", raising=False)
    audit_mod.RunJournal.set_run(None)


@pytest.fixture(scope="session")
def kerdock3():
    return FrameSpec(field_spec(3), 0)


@pytest.fixture(scope="session")
def dg31():
    return FrameSpec(field_spec(3), 1)


@pytest.fixture(scope="session")
def kerdock5():
    return FrameSpec(field_spec(5), 0)


@pytest.fixture(scope="session")
def dg51():
    return FrameSpec(field_spec(5), 1)
