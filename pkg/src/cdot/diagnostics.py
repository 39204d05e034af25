"""Structured diagnostics shared by the checkers, the evaluator and the CLI."""
from __future__ import annotations

from dataclasses import dataclass, field

# cdot checker codes
UNBOUND_VARIABLE = "UnboundVariable"
NOT_A_FUNCTION = "NotAFunction"
ARGUMENT_MISMATCH = "ArgumentMismatch"
TAG_NOT_TYPEABLE = "TagNotTypeable"
MISSING_MEMBER = "MissingMember"
ANNOTATION_REQUIRED = "AnnotationRequired"
FUEL_EXHAUSTED = "FuelExhausted"
DUPLICATE_LABEL = "DuplicateLabel"
LOOSE_BOUNDS = "LooseBoundsInNestedObject"
FIELD_INIT_NOT_STABLE = "FieldInitializerNotStable"
ILL_FORMED_PATH = "IllFormedPath"
SUBTYPE_FAILED = "SubtypeFailed"
DEFINITION_MISMATCH = "DefinitionMismatch"
STUCK_TERM = "StuckTerm"

# gadt checker codes
NON_EXHAUSTIVE_MATCH = "NonExhaustiveMatch"
UNKNOWN_CONSTRUCTOR = "UnknownConstructor"
CTOR_ARITY_MISMATCH = "ConstructorArityMismatch"
APPLIED_ARITY_MISMATCH = "AppliedArityMismatch"
ANNOTATION_MISMATCH = "AnnotationMismatch"
SCRUTINEE_NOT_GADT = "ScrutineeNotGadt"
UNBOUND_TYPE_VARIABLE = "UnboundTypeVariable"
ELIMINATION_MISMATCH = "EliminationMismatch"

# encoder codes
DUPLICATE_NAME = "DuplicateName"


@dataclass(frozen=True)
class Diagnostic:
    """One failure record: code, human text, and optional rule-site details."""

    code: str
    message: str
    rule: str | None = None
    subject: str | None = None
    expected: str | None = None
    actual: str | None = None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def render(self) -> str:
        parts = [f"{self.code}: {self.message}"]
        if self.rule:
            parts.append(f"  at rule {self.rule}")
        if self.subject:
            parts.append(f"  subject: {self.subject}")
        if self.expected:
            parts.append(f"  expected: {self.expected}")
        if self.actual:
            parts.append(f"  actual: {self.actual}")
        for n in self.notes:
            parts.append(f"  note: {n}")
        return "\n".join(parts)
