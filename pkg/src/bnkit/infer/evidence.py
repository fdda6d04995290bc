from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bnkit.core.factor import DiscreteFactor
from bnkit.exceptions import IncompatibleSpec, InvalidModel


@dataclass(frozen=True)
class Evidence:
    """Hard evidence ``{var: state}`` and virtual evidence ``{var: likelihood}``.

    States may be integer codes or labels; :meth:`resolve` maps labels to
    codes against a network.
    """

    hard: dict = field(default_factory=dict)
    virtual: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "hard", dict(self.hard or {}))
        virtual = {}
        for var, lik in dict(self.virtual or {}).items():
            arr = np.asarray(lik, dtype=float).reshape(-1)
            if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr < 0) or not arr.sum() > 0:
                raise InvalidModel(f"virtual evidence on {var!r} must be nonnegative and not all zero")
            virtual[var] = arr
        object.__setattr__(self, "virtual", virtual)
        both = set(self.hard) & set(self.virtual)
        if both:
            raise IncompatibleSpec(f"variables with both hard and virtual evidence: {sorted(both)}")

    @classmethod
    def coerce(cls, evidence) -> "Evidence":
        if evidence is None:
            return cls()
        if isinstance(evidence, Evidence):
            return evidence
        if isinstance(evidence, dict):
            return cls(hard=evidence)
        return cls(hard=dict(evidence))

    def resolve(self, bn) -> "Evidence":
        """Codes instead of labels, with cardinalities checked against ``bn``."""
        hard = {v: bn.state_index(v, s) for v, s in self.hard.items()}
        for v, lik in self.virtual.items():
            if lik.size != bn.card(v):
                raise InvalidModel(
                    f"virtual evidence on {v!r} has {lik.size} entries, cardinality is {bn.card(v)}"
                )
        return Evidence(hard, self.virtual)

    def variables(self) -> set:
        return set(self.hard) | set(self.virtual)

    def virtual_factors(self):
        return [DiscreteFactor._trusted((v,), (lik.size,), lik) for v, lik in sorted(self.virtual.items())]

    def indicator_factors(self, cards):
        """Hard evidence as one-hot factors (keeps scopes intact)."""
        out = []
        for v, s in sorted(self.hard.items()):
            arr = np.zeros(cards[v])
            arr[s] = 1.0
            out.append(DiscreteFactor._trusted((v,), (cards[v],), arr))
        return out
