"""Validation findings: data, not failures."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Finding:
    severity: str
    code: str
    message: str
    subject: str | None = None

    def to_dict(self) -> dict:
        return {"severity": self.severity, "code": self.code,
                "message": self.message, "subject": self.subject}

    @classmethod
    def from_dict(cls, doc: dict) -> "Finding":
        return cls(doc["severity"], doc["code"], doc["message"], doc.get("subject"))

    def __str__(self) -> str:
        where = f" [{self.subject}]" if self.subject else ""
        return f"{self.severity.upper()} {self.code}{where}: {self.message}"


def error(code: str, message: str, subject: str | None = None) -> Finding:
    return Finding(ERROR, code, message, subject)


def warning(code: str, message: str, subject: str | None = None) -> Finding:
    return Finding(WARNING, code, message, subject)


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple[Finding, ...] = ()

    @classmethod
    def of(cls, findings: Iterable[Finding]) -> "ValidationReport":
        return cls(tuple(findings))

    @property
    def errors(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == ERROR]

    @property
    def warnings(self) -> list[Finding]:
        return [f for f in self.findings if f.severity == WARNING]

    @property
    def ok(self) -> bool:
        return not self.errors

    def to_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.to_dict() for f in self.findings]}
