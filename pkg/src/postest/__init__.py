"""Post-estimation analysis: WTP, elasticities and model comparison."""

from .comparison import compare_elasticities, compare_wtp, model_ratio, percent_difference
from .elasticity import ElasticityTable, direct_elasticity, elasticity_table, mnl_elasticity
from .tables import write_table
from .wtp import WtpConvention, WtpDensity, WtpReport, wtp, wtp_density, wtp_table

__all__ = [
    "ElasticityTable",
    "WtpConvention",
    "WtpDensity",
    "WtpReport",
    "compare_elasticities",
    "compare_wtp",
    "direct_elasticity",
    "elasticity_table",
    "mnl_elasticity",
    "model_ratio",
    "percent_difference",
    "write_table",
    "wtp",
    "wtp_density",
    "wtp_table",
]
