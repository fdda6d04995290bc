from bnkit.core.data import MISSING, DataTable
from bnkit.core.factor import (
    DiscreteFactor,
    factor_marginalize,
    factor_normalize,
    factor_product,
    factor_reduce,
    product_of,
)
from bnkit.core.graph import (
    Dag,
    Pdag,
    d_separated,
    moralize,
    pdag_to_dag,
    topological_order,
)
from bnkit.core.network import (
    DiscreteBayesianNetwork,
    TabularCpd,
    VariableMeta,
    joint_distribution,
)

__all__ = [
    "MISSING",
    "Dag",
    "DataTable",
    "DiscreteBayesianNetwork",
    "DiscreteFactor",
    "Pdag",
    "TabularCpd",
    "VariableMeta",
    "d_separated",
    "factor_marginalize",
    "factor_normalize",
    "factor_product",
    "factor_reduce",
    "joint_distribution",
    "moralize",
    "pdag_to_dag",
    "product_of",
    "topological_order",
]
