"""Pass/fail reports produced by the verification operations.

A report is a named list of labelled items; an item failing carries the
residual it left behind (pretty-printed, plus structured payload for JSON).
Failures are reported, never raised: a failing identity falsifies the engine
and the caller decides what to do with that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional


@dataclass(frozen=True)
class CheckItem:
    label: str
    ok: bool
    residual: Optional[str] = None

    def to_json(self) -> dict:
        out = {"label": self.label, "ok": self.ok}
        if self.residual is not None:
            out["residual"] = self.residual
        return out


@dataclass
class CheckReport:
    name: str
    items: List[CheckItem] = field(default_factory=list)

    def add(self, label: str, ok: bool, residual: Optional[str] = None) -> None:
        self.items.append(CheckItem(label, ok, None if ok else residual))

    @property
    def passed(self) -> bool:
        return all(item.ok for item in self.items)

    def failures(self) -> List[CheckItem]:
        return [item for item in self.items if not item.ok]

    def to_json(self) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "items": [item.to_json() for item in self.items],
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{self.name}: {status} ({len(self.items)} checks, {len(self.failures())} failures)"
