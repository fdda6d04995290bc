from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from bnkit.core.data import DataTable
from bnkit.core.network import VariableMeta
from bnkit.io import read_bif

DATA = Path(__file__).parent / "data"
NETWORKS = DATA / "networks"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def network(name):
    return read_bif(NETWORKS / f"{name}.bif")


def table_from_counts(names, counts):
    """DataTable with one row per unit count of a joint count array (binary-or-more)."""
    counts = np.asarray(counts)
    rows = []
    for idx in np.ndindex(*counts.shape):
        rows += [list(idx)] * int(counts[idx])
    metas = [VariableMeta.default(n, c) for n, c in zip(names, counts.shape)]
    return DataTable(metas, np.array(rows, dtype=np.int64).reshape(-1, len(names)))


@pytest.fixture
def data_dir():
    return DATA
