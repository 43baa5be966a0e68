"""Contextual multi-objective bandits with a dominant objective."""
from .core import ConfigError, HyperParams, InvalidInputError, PartitionSpec, RewardVector
from .pareto import lex_optimal, pareto_front, psg
from .policies import ALGORITHMS, MocMab, ParetoUCB1, ScalarizedUCB1, UCB1, make_policy

__all__ = [
    "ALGORITHMS", "ConfigError", "HyperParams", "InvalidInputError", "MocMab", "ParetoUCB1",
    "PartitionSpec", "RewardVector", "ScalarizedUCB1", "UCB1", "lex_optimal", "make_policy",
    "pareto_front", "psg",
]
