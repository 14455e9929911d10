"""Toy-theory simulations of five layers of quantum nonclassicality.

Layers and modules: incompatibility (:mod:`gpt`, :mod:`protocols`,
:mod:`security`), contextuality (:mod:`kcbs`), entanglement without
nonlocality (:mod:`toybit`), nonlocality (:mod:`boxes`) and indistinguishability
(:mod:`boson`).
"""

from .errors import NumericalFailure, UnsupportedError

__version__ = "0.1.0"

__all__ = ["NumericalFailure", "UnsupportedError", "__version__"]
