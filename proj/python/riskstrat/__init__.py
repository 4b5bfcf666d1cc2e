"""Explainable risk stratification: training, evaluation, and Shapley attribution."""

try:
    from ._riskstrat import *  # noqa: F401,F403
    from ._riskstrat import __doc__ as _doc
except ImportError:  # build-tree layout: extension sits next to the package
    from _riskstrat import *  # noqa: F401,F403
    from _riskstrat import __doc__ as _doc

__doc__ = _doc
