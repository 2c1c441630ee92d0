"""Quantitative omega-language workbench: weighted Buchi/Muller automata,
weight assignment logic, and exact evaluation on ultimately periodic words."""

__version__ = "0.1.0"
