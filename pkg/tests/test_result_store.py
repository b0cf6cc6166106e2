import pytest
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.config import Settings
from core.result_store import ResultStore


class TestResultStore:

    @pytest.fixture
    def store(self, tmp_path):
        return ResultStore(str(tmp_path / "cache" / "tables.db"))

    @pytest.fixture
    def counter(self):
        calls = []

        def compute():
            calls.append(1)
            return {0: {0: 1}, 1: {0: 1, 2: 3}}

        return compute, calls

    def test_creates_database(self, store):
        assert store.db_path.exists()

    def test_compute_once_then_cached(self, store, counter):
        compute, calls = counter
        first = store.hilbert_table("tHyperCom", None, "revdict", 4, None, compute)
        second = store.hilbert_table("tHyperCom", None, "revdict", 4, None, compute)

        # Assertions
        assert first == second == {0: {0: 1}, 1: {0: 1, 2: 3}}
        assert len(calls) == 1

    def test_keys_separate_parameters(self, store, counter):
        compute, calls = counter
        store.hilbert_table("blmHyperCom", 2, "revdict", 4, 6, compute)
        store.hilbert_table("blmHyperCom", 3, "revdict", 4, 6, compute)
        store.hilbert_table("blmHyperCom", 2, "revdict", 4, None, compute)
        store.hilbert_table("blmHyperCom", 2, "pathdeglex", 4, 6, compute)
        assert len(calls) == 4

    def test_empty_arity_survives(self, store):
        table = {0: {}, 1: {1: 2}}
        store.hilbert_table("x", None, "revdict", 1, None, lambda: table)
        cached = store.hilbert_table("x", None, "revdict", 1, None, lambda: pytest.fail("should be cached"))
        assert cached == table

    def test_clear(self, store, counter):
        compute, calls = counter
        store.hilbert_table("tGrav", None, "revdict", 3, None, compute)
        store.clear()
        store.hilbert_table("tGrav", None, "revdict", 3, None, compute)
        assert len(calls) == 2

    def test_disabled_store_always_computes(self, tmp_path, counter):
        compute, calls = counter
        store = ResultStore(str(tmp_path / "never.db"), enabled=False)
        store.hilbert_table("tGrav", None, "revdict", 3, None, compute)
        store.hilbert_table("tGrav", None, "revdict", 3, None, compute)
        store.clear()

        # Assertions
        assert len(calls) == 2
        assert not (tmp_path / "never.db").exists()

    def test_from_settings(self, tmp_path):
        settings = Settings(cache_path=str(tmp_path / "s.db"), cache_enabled=False)
        store = ResultStore.from_settings(settings)
        assert not store.enabled
        assert str(store.db_path) == str(tmp_path / "s.db")
