"""Categorical datasets with optional row weights and missing cells."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from bnkit.core.network import VariableMeta
from bnkit.exceptions import InvalidModel, NegativeWeight, UnknownVariable

MISSING = -1


class DataTable:
    """Column-named categorical data stored as integer state codes.

    Parameters
    ----------
    metas : sequence of VariableMeta
        One per column, in column order; defines names and cardinalities.
    codes : array-like of int, shape (n_rows, n_columns)
        ``MISSING`` (-1) marks a missing cell.
    weights : array-like of float, optional
        Nonnegative per-row weights; ``None`` means every row weighs 1.
    latents : iterable of str, optional
        Columns that hold latent variables (e.g. sampled from a model).
    """

    def __init__(self, metas: Sequence[VariableMeta], codes, weights=None, latents=()):
        metas = tuple(metas)
        columns = tuple(m.name for m in metas)
        if len(set(columns)) != len(columns):
            raise InvalidModel(f"duplicate column names {columns}")
        codes = np.asarray(codes, dtype=np.int64)
        if codes.size == 0:
            codes = codes.reshape(-1, len(columns))
        if codes.ndim != 2 or codes.shape[1] != len(columns):
            raise InvalidModel(f"codes must have shape (n, {len(columns)}), got {codes.shape}")
        for j, m in enumerate(metas):
            col = codes[:, j]
            if np.any((col < MISSING) | (col >= m.card)):
                raise InvalidModel(f"column {m.name!r} has codes outside [0, {m.card})")
        if weights is not None:
            weights = np.asarray(weights, dtype=float).reshape(-1)
            if weights.shape[0] != codes.shape[0]:
                raise InvalidModel("weights length differs from row count")
            if not np.all(np.isfinite(weights)) or np.any(weights < 0):
                raise NegativeWeight("row weights must be finite and nonnegative")
            weights.flags.writeable = False
        latents = frozenset(latents)
        if not latents <= set(columns):
            raise UnknownVariable(f"latent columns not in table: {sorted(latents - set(columns))}")
        codes.flags.writeable = False
        self.metas = metas
        self.columns = columns
        self.codes = codes
        self.weights = weights
        self.latents = latents
        self._index = {c: j for j, c in enumerate(columns)}

    @property
    def n_rows(self) -> int:
        return self.codes.shape[0]

    def __len__(self):
        return self.n_rows

    def meta(self, column) -> VariableMeta:
        return self.metas[self.index(column)]

    def card(self, column) -> int:
        return self.meta(column).card

    def index(self, column) -> int:
        try:
            return self._index[column]
        except KeyError:
            raise UnknownVariable(f"unknown column {column!r}") from None

    def column(self, name) -> np.ndarray:
        return self.codes[:, self.index(name)]

    def row_weights(self) -> np.ndarray:
        if self.weights is None:
            return np.ones(self.n_rows)
        return np.asarray(self.weights)

    def has_missing(self, columns=None) -> bool:
        idx = [self.index(c) for c in (columns if columns is not None else self.columns)]
        return bool(np.any(self.codes[:, idx] == MISSING))

    def counts(self, variables: Sequence[str]) -> np.ndarray:
        """Weighted contingency table over ``variables``.

        Rows with a missing cell in any of ``variables`` are dropped. The
        result has shape ``[card(v) for v in variables]``.
        """
        variables = list(variables)
        idx = [self.index(v) for v in variables]
        shape = tuple(self.metas[j].card for j in idx)
        w = self.row_weights()
        if not variables:
            return np.array(w.sum())
        sub = self.codes[:, idx]
        ok = np.all(sub != MISSING, axis=1)
        if not ok.all():
            sub, w = sub[ok], w[ok]
        flat = np.ravel_multi_index(tuple(sub.T), shape) if sub.shape[0] else np.zeros(0, dtype=np.int64)
        size = int(np.prod(shape))
        return np.bincount(flat, weights=w, minlength=size).reshape(shape)

    def select(self, columns: Sequence[str]) -> "DataTable":
        idx = [self.index(c) for c in columns]
        return DataTable(
            [self.metas[j] for j in idx],
            self.codes[:, idx],
            self.weights,
            latents=self.latents & set(columns),
        )

    def take(self, rows) -> "DataTable":
        rows = np.asarray(rows)
        w = None if self.weights is None else np.asarray(self.weights)[rows]
        return DataTable(self.metas, self.codes[rows], w, self.latents)

    def with_weights(self, weights) -> "DataTable":
        return DataTable(self.metas, self.codes, weights, self.latents)

    def drop_latents(self) -> "DataTable":
        return self.select([c for c in self.columns if c not in self.latents])

    def recode(self, metas) -> "DataTable":
        """Re-express columns against other state declarations, matching labels.

        ``metas`` maps column name to VariableMeta (or is a sequence of them);
        columns not mentioned keep their coding.
        """
        from bnkit.exceptions import UnknownState

        if not isinstance(metas, dict):
            metas = {m.name: m for m in metas}
        new_metas = list(self.metas)
        codes = self.codes.copy()
        for j, old in enumerate(self.metas):
            new = metas.get(old.name)
            if new is None or new.states == old.states:
                continue
            lookup = {s: i for i, s in enumerate(new.states)}
            unknown = [s for s in old.states if s not in lookup]
            col = codes[:, j]
            used = set(np.unique(col[col != MISSING]).tolist())
            bad = [s for i, s in enumerate(old.states) if i in used and s in unknown]
            if bad:
                raise UnknownState(f"column {old.name!r} has states {bad} not in {list(new.states)}")
            table = np.array([lookup.get(s, MISSING) for s in old.states] + [MISSING], dtype=np.int64)
            codes[:, j] = table[col]  # MISSING (-1) picks the trailing entry
            new_metas[j] = new
        return DataTable(new_metas, codes, self.weights, self.latents)

    def labels(self):
        """Rows as lists of state labels (``None`` for missing)."""
        out = []
        for row in self.codes:
            out.append([None if c == MISSING else m.states[c] for c, m in zip(row, self.metas)])
        return out

    @classmethod
    def from_labels(cls, columns, rows, states=None, weights=None) -> "DataTable":
        """Build from label rows. ``None``, ``""`` and ``"?"`` are missing.

        Without ``states`` each column's states are the sorted distinct labels.
        """
        from bnkit.exceptions import UnknownState

        columns = list(columns)
        rows = [[None if v is None or str(v) in ("", "?") else str(v) for v in r] for r in rows]
        metas = []
        codes = np.full((len(rows), len(columns)), MISSING, dtype=np.int64)
        for j, name in enumerate(columns):
            if states is not None and name in states:
                meta = VariableMeta(name, tuple(states[name]))
            else:
                seen = sorted({r[j] for r in rows if r[j] is not None})
                if len(seen) < 2:
                    raise InvalidModel(
                        f"column {name!r} has {len(seen)} observed state(s); "
                        "declare its states explicitly"
                    )
                meta = VariableMeta(name, tuple(seen))
            lookup = {s: i for i, s in enumerate(meta.states)}
            for i, r in enumerate(rows):
                v = r[j]
                if v is None:
                    continue
                if v not in lookup:
                    raise UnknownState(f"row {i + 1}: {v!r} is not a state of {name!r}")
                codes[i, j] = lookup[v]
            metas.append(meta)
        return cls(metas, codes, weights)

    @classmethod
    def from_pandas(cls, df, states=None, weights=None) -> "DataTable":
        """Build from a DataFrame; NaN/None cells become missing."""
        import pandas as pd

        rows = []
        values = df.astype(object).where(pd.notna(df), None).values.tolist()
        for r in values:
            rows.append([None if v is None else str(v) for v in r])
        return cls.from_labels([str(c) for c in df.columns], rows, states=states, weights=weights)

    def to_pandas(self):
        import pandas as pd

        return pd.DataFrame(self.labels(), columns=list(self.columns))

    def __repr__(self):
        return f"DataTable(columns={list(self.columns)}, n_rows={self.n_rows})"
