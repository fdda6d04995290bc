from bnkit.learn.citests import (
    ChiSquared,
    CiResult,
    CressieRead,
    DSeparationOracle,
    GTest,
    PowerDivergence,
    ci_test,
)
from bnkit.learn.hillclimb import hill_climb
from bnkit.learn.mmhc import mmhc, mmpc
from bnkit.learn.pc import cpdag_of, pc_stable
from bnkit.learn.scores import AIC, BIC, K2, BDeu, BDs, CustomScore, local_score
from bnkit.learn.trees import (
    chow_liu,
    conditional_mutual_information,
    mutual_information,
    normalized_mutual_information,
    tan,
)

__all__ = [
    "AIC",
    "BIC",
    "BDeu",
    "BDs",
    "ChiSquared",
    "CiResult",
    "CressieRead",
    "CustomScore",
    "DSeparationOracle",
    "GTest",
    "K2",
    "PowerDivergence",
    "chow_liu",
    "ci_test",
    "conditional_mutual_information",
    "cpdag_of",
    "hill_climb",
    "local_score",
    "mmhc",
    "mmpc",
    "mutual_information",
    "normalized_mutual_information",
    "pc_stable",
    "tan",
]
