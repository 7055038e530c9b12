"""Dual-system stochastic choice: forward model, identification, tests and estimation."""
__version__ = "0.1.0"

from .core import ChoiceData, DstParams, LinearOrder, LuceWeights, dst_prob, dst_rcf  # noqa: E402
from .identify import identify  # noqa: E402

__all__ = ["ChoiceData", "DstParams", "LinearOrder", "LuceWeights", "dst_prob", "dst_rcf", "identify",
           "__version__"]
