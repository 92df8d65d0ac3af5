# scenarios/base.py

"""
Defines the Scenario type and the expected outcomes a scenario can declare.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from core.errors import StructuralError
from core.maps import MapSequence, SkewSystem
from utils.numeric_helpers import point_to_list


@dataclass(frozen=True)
class Converges:
    """
    The engines certify convergence; `limit` is the closed-form limit when one is known.
    """

    limit: Optional[tuple] = None
    kind: str = "Converges"

    def to_dict(self):
        return {"kind": self.kind, "limit": _limit_to_list(self.limit)}


@dataclass(frozen=True)
class Diverges:
    kind: str = "Diverges"

    def to_dict(self):
        return {"kind": self.kind}


@dataclass(frozen=True)
class SplitLimit:
    """
    Raw runs from the two designated starts reach two different limits.
    """

    limit_a: tuple
    limit_b: tuple
    start_a: tuple
    start_b: tuple
    kind: str = "SplitLimit"

    def to_dict(self):
        return {
            "kind": self.kind,
            "limit_a": _limit_to_list(self.limit_a), "limit_b": _limit_to_list(self.limit_b),
            "start_a": _limit_to_list(self.start_a), "start_b": _limit_to_list(self.start_b),
        }


Expected = Union[Converges, Diverges, SplitLimit]


def _limit_to_list(value):
    if value is None:
        return None
    if isinstance(value, tuple):
        return [point_to_list(part) for part in value]
    return point_to_list(value)


@dataclass(frozen=True, eq=False)
class Scenario:
    """
    A ready-to-run map system with its expected outcome and oracle.

    Attributes:
        name (str): Registry name.
        system (MapSequence or SkewSystem): The system to run.
        expected (Expected): Converges, Diverges or SplitLimit.
        start: Default start point (sequences) or pair (skew systems).
        x0: Reference point of a MapSequence; skew systems carry their own anchors.
        oracle (Callable, optional): Maps a computed limit to {'reference', 'error', ...}.
        description (str): One-line summary for the `list` command.
        params (dict): Parameters the scenario was built with.
        max_n (int, optional): Cap on composition length.
        notes (dict): Derived constants worth reporting.
    """

    name: str
    system: Union[MapSequence, SkewSystem]
    expected: Expected
    start: object
    x0: Optional[np.ndarray] = None
    oracle: Optional[Callable[[object], dict]] = None
    description: str = ""
    params: dict = field(default_factory=dict)
    max_n: Optional[int] = None
    notes: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.is_skew and self.x0 is None:
            raise StructuralError(f"scenario '{self.name}' needs a reference point x0 for its sequence")

    @property
    def is_skew(self):
        return isinstance(self.system, SkewSystem)

    @property
    def reference_point(self):
        return (self.system.x0, self.system.y0) if self.is_skew else self.x0

    def check_oracle(self, value):
        """
        Compares a computed limit with the oracle.

        Returns:
            dict or None: The oracle's verdict, or None when the scenario has no oracle.
        """
        if self.oracle is None:
            return None
        return self.oracle(value)

    def consistent(self, tol=1e-9):
        """
        Checks that a closed-form expected limit agrees with the oracle.
        """
        if not isinstance(self.expected, Converges) or self.expected.limit is None or self.oracle is None:
            return True
        return self.oracle(self.expected.limit)["error"] <= tol

    def describe(self):
        return {
            "name": self.name,
            "description": self.description,
            "params": dict(self.params),
            "expected": self.expected.to_dict(),
            "max_n": self.max_n,
            "notes": self.notes,
        }
