"""Built-in models."""

from __future__ import annotations

import math

from .errors import InvalidModelError
from .sft import SftModel
from .transfer import CylindricalPotential

THREE_SYMBOL_MATRIX = [[0, 1, 1], [1, 0, 1], [1, 1, 1]]


def three_symbol_example(ep: float = 0.2, eq: float = 0.3):
    """Model, normalized potential and Delta = {1, 2} of the three-symbol example.

    ``ep`` and ``eq`` are the values of exp(phi) on C[1] and C[2]; the values
    on C[3] are forced by normalization.
    """
    if not (ep > 0 and eq > 0 and ep + eq < 1):
        raise InvalidModelError(f"need ep > 0, eq > 0 and ep + eq < 1, got ep={ep}, eq={eq}")
    model = SftModel(["1", "2", "3"], THREE_SYMBOL_MATRIX)
    p, q = math.log(ep), math.log(eq)
    values = {
        (0, 1): p, (0, 2): p,
        (1, 0): q, (1, 2): q,
        (2, 0): math.log(1 - eq),
        (2, 1): math.log(1 - ep),
        (2, 2): math.log(1 - ep - eq),
    }
    return model, CylindricalPotential(model, 2, values), ("1", "2")
