import logging
import sqlite3
from pathlib import Path
from typing import Callable, Dict, Optional

import pandas as pd

from .config import Settings, get_settings

logger = logging.getLogger(__name__)

Table = Dict[int, Dict[int, int]]


class ResultStore:
    """sqlite cache of Hilbert tables keyed by family, k, order and truncation"""

    def __init__(self, db_path: str = "data/opforge_cache.db", enabled: bool = True):
        self.enabled = enabled
        self.db_path = Path(db_path)
        if self.enabled:
            self.db_path.parent.mkdir(parents=True, exist_ok=True)
            self._init_database()

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None) -> "ResultStore":
        settings = settings or get_settings()
        return cls(settings.cache_path, settings.cache_enabled)

    def _init_database(self):
        """Initialize SQLite database for caching Hilbert tables"""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()

        cursor.execute('''
            CREATE TABLE IF NOT EXISTS hilbert_tables (
                family TEXT,
                k INTEGER,
                order_text TEXT,
                max_arity INTEGER,
                max_degree INTEGER,
                arity INTEGER,
                degree INTEGER,
                count INTEGER,
                PRIMARY KEY (family, k, order_text, max_arity, max_degree, arity, degree)
            )
        ''')

        conn.commit()
        conn.close()

    @staticmethod
    def _key(family: str, k: Optional[int], order_text: str, max_arity: int, max_degree: Optional[int]) -> tuple:
        # sqlite treats NULLs in a primary key as distinct
        return (family, -1 if k is None else k, order_text, max_arity, -1 if max_degree is None else max_degree)

    def hilbert_table(
        self,
        family: str,
        k: Optional[int],
        order_text: str,
        max_arity: int,
        max_degree: Optional[int],
        compute: Callable[[], Table],
    ) -> Table:
        """Cached table, computed and stored on a miss"""
        key = self._key(family, k, order_text, max_arity, max_degree)
        if self.enabled:
            cached = self._get_cached(key)
            if cached is not None:
                logger.debug(f"Cache hit for {family} k={k}")
                return cached
        table = compute()
        if self.enabled:
            self._cache(key, table)
        return table

    def _get_cached(self, key: tuple) -> Optional[Table]:
        """Get a cached Hilbert table from the database"""
        conn = sqlite3.connect(self.db_path)
        query = '''
            SELECT arity, degree, count
            FROM hilbert_tables
            WHERE family = ? AND k = ? AND order_text = ? AND max_arity = ? AND max_degree = ?
            ORDER BY arity, degree
        '''
        df = pd.read_sql_query(query, conn, params=key)
        conn.close()
        if df.empty:
            return None
        table: Table = {}
        for row in df.itertuples(index=False):
            table.setdefault(int(row.arity), {})
            if row.degree is not None and int(row.count) > 0:
                table[int(row.arity)][int(row.degree)] = int(row.count)
        return table

    def _cache(self, key: tuple, table: Table):
        """Cache a Hilbert table to the database"""
        conn = sqlite3.connect(self.db_path)
        cursor = conn.cursor()

        for arity, counts in table.items():
            # a zero row keeps empty arities distinguishable from a miss
            rows = list(counts.items()) or [(0, 0)]
            for degree, count in rows:
                cursor.execute('''
                    INSERT OR REPLACE INTO hilbert_tables
                    (family, k, order_text, max_arity, max_degree, arity, degree, count)
                    VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                ''', key + (int(arity), int(degree), int(count)))

        conn.commit()
        conn.close()

    def clear(self):
        if not self.enabled:
            return
        conn = sqlite3.connect(self.db_path)
        conn.execute("DELETE FROM hilbert_tables")
        conn.commit()
        conn.close()
