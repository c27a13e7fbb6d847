"""Fact templates emitted by the computational modules.

A template names the two spaces in their canonical text form (``"D'"``,
``"G{s}"``, ...) and a parameter constraint such as ``"1 < s <= 2"``.  The
inference layer turns templates into facts about a concrete operator.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class ThresholdFact:
    polarity: str
    first: str
    second: str
    constraint: str
    note: str
    sharp: bool = True

    def to_dict(self) -> dict:
        return {"polarity": self.polarity, "first": self.first, "second": self.second,
                "constraint": self.constraint, "note": self.note, "sharp": self.sharp}

    def text(self) -> str:
        head = "h" if self.polarity == "holds" else "not h"
        tail = f" for {self.constraint}" if self.constraint else ""
        return f"{head}({self.first}, {self.second}){tail}"
