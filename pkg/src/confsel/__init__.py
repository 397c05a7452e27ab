"""Confounder selection on causal DAGs.

Submodules: ``graph`` and ``cgio`` for graphs and the ``.cg`` format,
``dsep`` for separation queries, ``adjustment`` and ``blanket`` for
selection rules, ``sem`` for simulation and estimation, ``testkit`` for
brute-force oracles and property suites.
"""

from .graph import Dag, GraphError, UnknownVertexError

__version__ = "0.1.0"

__all__ = ["Dag", "GraphError", "UnknownVertexError", "__version__"]
