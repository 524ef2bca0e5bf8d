"""Regularity and learnability of numeral systems.

Numeral systems are scored by the description length of their minimal
finite automaton and by how quickly a small recurrent policy learns to map
numerals to numbers from reward alone.
"""

from .numerals import (
    Numeral, NumeralSystem, Symbol, builtin_system, evaluate, read_system, render, tokenize,
    validate_system, write_system,
)
from .dfa import encoding_cost, irregularity, local_irregularity, minimal_dfa
from .generators import build_neighbourhood, enumerate_alternatives, generate_random_system
from .agent import TrainConfig, power_law, reward, train_run, uniform
from .harness import auc, evaluate as evaluate_accuracy, measure_learnability

__version__ = "0.1.0"
