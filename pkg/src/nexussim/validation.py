"""Validation findings shared by the electric and gas network checks."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Finding:
    """A single violated invariant, attached to the offending element."""

    kind: str        # element category: "bus", "line", "pipe", "topology", ...
    element: str     # element id, or "" for network-level findings
    message: str

    def __str__(self) -> str:
        where = f" [{self.element}]" if self.element else ""
        return f"{self.kind}{where}: {self.message}"


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def add(self, kind: str, element: str, message: str) -> None:
        self.findings.append(Finding(kind, element, message))

    def extend(self, other: "ValidationReport") -> None:
        self.findings.extend(other.findings)

    def __str__(self) -> str:
        if self.ok:
            return "no findings"
        return "\n".join(str(f) for f in self.findings)
