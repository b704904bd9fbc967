"""Three-valued results shared by the bounded checkers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

HOLDS, FAILS, INCONCLUSIVE = "holds", "fails", "inconclusive"

EXIT_CODES = {HOLDS: 0, FAILS: 1, INCONCLUSIVE: 3}


@dataclass
class Verdict:
    status: str
    witness: Any = None
    detail: str = ""
    bounds: dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.status == HOLDS

    @property
    def holds(self) -> bool:
        return self.status == HOLDS

    @property
    def fails(self) -> bool:
        return self.status == FAILS

    def __str__(self) -> str:
        b = ", ".join(f"{k} {v}" for k, v in self.bounds.items())
        s = f"{self.status} ({b})" if b else self.status
        return f"{s}: {self.detail}" if self.detail else s


def combine(verdicts) -> str:
    """Overall status: any failure wins, then any inconclusive."""
    st = {v.status for v in verdicts}
    if FAILS in st:
        return FAILS
    if INCONCLUSIVE in st:
        return INCONCLUSIVE
    return HOLDS
