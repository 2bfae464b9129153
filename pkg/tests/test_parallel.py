import pytest

from ergolab.parallel import ENV_WORKERS, pmap, resolve_workers


def _square(x):
    return x * x


def test_pmap_preserves_order_serial():
    assert pmap(_square, range(10), workers=1) == [x * x for x in range(10)]


def test_pmap_preserves_order_parallel():
    assert pmap(_square, range(25), workers=2) == [x * x for x in range(25)]


def test_resolve_workers_explicit_wins(monkeypatch):
    monkeypatch.setenv(ENV_WORKERS, "7")
    assert resolve_workers(3) == 3


def test_resolve_workers_env(monkeypatch):
    monkeypatch.setenv(ENV_WORKERS, "5")
    assert resolve_workers(None) == 5


def test_resolve_workers_default(monkeypatch):
    monkeypatch.delenv(ENV_WORKERS, raising=False)
    assert resolve_workers(None) >= 1
