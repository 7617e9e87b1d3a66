from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class FitVerdict:
    """Outcome of a fitting question.

    ``certificate`` lists, for a negative answer, every candidate that was
    examined together with the conditions it satisfied; for a positive answer
    it records the candidate that produced the witness.
    """
    exists: bool
    language: str
    mode: str = "tgd"
    witness: Any = None
    certificate: list = field(default_factory=list)
    resource_limited: bool = False
    note: str = ""

    @property
    def status(self) -> str:
        if self.resource_limited:
            return "RESOURCE-LIMIT"
        return "EXISTS" if self.exists else "NO"
