# lib/errors.py
from __future__ import annotations

from typing import Any, Optional, Sequence


class LhomError(Exception):
    """Base class for every error raised by the library."""


class FormatError(LhomError):
    def __init__(self, msg: str, path: Optional[str] = None, line: Optional[int] = None):
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(f"{where}{msg}")
        self.path = path
        self.line = line


class NotBipartite(LhomError):
    def __init__(self, witness: Sequence[int]):
        super().__init__(f"graph is not bipartite (odd closed walk {list(witness)})")
        self.witness = list(witness)


class TargetNotBipartite(LhomError):
    pass


class TargetBipartite(LhomError):
    pass


class InvalidCover(LhomError):
    def __init__(self, condition: int, witness: Any):
        super().__init__(f"cover condition ({condition}) violated: {witness}")
        self.condition = condition
        self.witness = witness


class SizeCapExceeded(LhomError):
    def __init__(self, what: str, size: int, cap: int):
        super().__init__(f"{what}: size {size} exceeds cap {cap}")
        self.size = size
        self.cap = cap


class BudgetExceeded(LhomError):
    def __init__(self, what: str, budget: int):
        super().__init__(f"{what}: budget of {budget} exhausted")
        self.budget = budget


class NoLayout(LhomError):
    pass


class DegenerateField(LhomError):
    def __init__(self, prime: int, d_max: int):
        super().__init__(f"field modulus {prime} must exceed the largest domain value {d_max}")
        self.prime = prime
        self.d_max = d_max


class NotStrongSplit(LhomError):
    pass


class NoTriple(LhomError):
    pass


class PreconditionViolated(LhomError):
    def __init__(self, which: str):
        super().__init__(f"precondition violated: {which}")
        self.which = which


class SynthesisBudgetExceeded(LhomError):
    def __init__(self, explored: int):
        super().__init__(f"distinguisher synthesis gave up after {explored} states")
        self.explored = explored


class TripleCaseUnsupported(LhomError):
    pass


class OracleUnknown(LhomError):
    def __init__(self, vertices: Sequence[int]):
        super().__init__(f"circular-arc oracle returned unknown on {list(vertices)}")
        self.vertices = list(vertices)
