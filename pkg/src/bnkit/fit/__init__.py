from bnkit.fit.em import EmConfig, EmResult, em_fit
from bnkit.fit.parameters import (
    BDeuPrior,
    DirichletPrior,
    K2Prior,
    bayes_fit,
    cpd_from_counts,
    mle_fit,
)

__all__ = [
    "BDeuPrior",
    "DirichletPrior",
    "EmConfig",
    "EmResult",
    "K2Prior",
    "bayes_fit",
    "cpd_from_counts",
    "em_fit",
    "mle_fit",
]
