"""Map compiler error messages onto 14 error types grouped into 5 classes."""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from enum import Enum

from .logparse import Diagnostic


class ErrorClass(str, Enum):
    DEPENDENCY = "Dependency"
    SYNTAX = "Syntax"
    TYPE_MISMATCH = "TypeMismatch"
    SEMANTIC = "Semantic"
    OTHER = "Other"
    UNCLASSIFIED = "Unclassified"


class ErrorType(str, Enum):
    """Error types in descending order of observed frequency."""

    WasNotDeclared = "WasNotDeclared"
    HasNoMemberNamed = "HasNoMemberNamed"
    ExpectedBeforeToken = "ExpectedBeforeToken"
    DoesNotNameAType = "DoesNotNameAType"
    NoDeclarationMatches = "NoDeclarationMatches"
    NoSuchFileOrDirectory = "NoSuchFileOrDirectory"
    LdReturned = "LdReturned"
    InvalidConversion = "InvalidConversion"
    UnusedVariable = "UnusedVariable"
    DoesNotHaveAnyFieldNamed = "DoesNotHaveAnyFieldNamed"
    CannotAllocateAnObjectOf = "CannotAllocateAnObjectOf"
    OfNonClassType = "OfNonClassType"
    CannotConvert = "CannotConvert"
    StaticAssertionFailed = "StaticAssertionFailed"
    Unclassified = "Unclassified"

    @property
    def rank(self) -> int:
        """0-based position in frequency order; Unclassified sorts last."""
        return _RANK[self]


CLASSIFIED_TYPES: tuple[ErrorType, ...] = tuple(t for t in ErrorType if t is not ErrorType.Unclassified)
_RANK = {t: i for i, t in enumerate(ErrorType)}

# (type, documented fragment, class, observed share in percent)
TAXONOMY: tuple[tuple[ErrorType, str, ErrorClass, float], ...] = (
    (ErrorType.WasNotDeclared, "was not declared", ErrorClass.DEPENDENCY, 40.05),
    (ErrorType.HasNoMemberNamed, "has no member named", ErrorClass.DEPENDENCY, 20.18),
    (ErrorType.ExpectedBeforeToken, "expected X before Y token", ErrorClass.SYNTAX, 11.77),
    (ErrorType.DoesNotNameAType, "does not name a type", ErrorClass.DEPENDENCY, 8.89),
    (ErrorType.NoDeclarationMatches, "no declaration matches", ErrorClass.TYPE_MISMATCH, 8.36),
    (ErrorType.NoSuchFileOrDirectory, "no such file or directory", ErrorClass.DEPENDENCY, 2.76),
    (ErrorType.LdReturned, "ld returned", ErrorClass.DEPENDENCY, 2.21),
    (ErrorType.InvalidConversion, "invalid conversion", ErrorClass.TYPE_MISMATCH, 1.53),
    (ErrorType.UnusedVariable, "unused variable", ErrorClass.DEPENDENCY, 1.14),
    (ErrorType.DoesNotHaveAnyFieldNamed, "does not have any field named", ErrorClass.TYPE_MISMATCH, 0.82),
    (ErrorType.CannotAllocateAnObjectOf, "cannot allocate an object of", ErrorClass.SEMANTIC, 0.73),
    (ErrorType.OfNonClassType, "of non-class type", ErrorClass.OTHER, 0.71),
    (ErrorType.CannotConvert, "cannot convert", ErrorClass.TYPE_MISMATCH, 0.49),
    (ErrorType.StaticAssertionFailed, "static assertion failed", ErrorClass.SYNTAX, 0.36),
)

_CLASS = {t: c for t, _, c, _ in TAXONOMY}
_CLASS[ErrorType.Unclassified] = ErrorClass.UNCLASSIFIED

# observed shares, percent; used as the simulator's default mixture
OBSERVED_SHARES = {t: share for t, _, _, share in TAXONOMY}

_EXPECTED_BEFORE_TOKEN = re.compile(r"\bexpected\b.*\bbefore\b.*\btoken\b")


def _matcher(error_type: ErrorType, fragment: str):
    if error_type is ErrorType.ExpectedBeforeToken:
        return lambda msg: _EXPECTED_BEFORE_TOKEN.search(msg) is not None
    if error_type is ErrorType.NoSuchFileOrDirectory:
        # strerror() text is capitalised in GCC output
        variants = (fragment, fragment[0].upper() + fragment[1:])
        return lambda msg: any(v in msg for v in variants)
    return lambda msg: fragment in msg


_MATCHERS = tuple((t, _matcher(t, frag)) for t, frag, _, _ in TAXONOMY)


def classify_message(message: str) -> ErrorType:
    """Return the first type, in frequency order, whose fragment occurs in ``message``."""
    for error_type, matches in _MATCHERS:
        if matches(message):
            return error_type
    return ErrorType.Unclassified


def class_of(error_type: ErrorType) -> ErrorClass:
    return _CLASS[error_type]


@dataclass(frozen=True)
class ClassifiedError:
    diagnostic: Diagnostic
    error_type: ErrorType

    @property
    def error_class(self) -> ErrorClass:
        return class_of(self.error_type)


def classify(diagnostic: Diagnostic) -> ClassifiedError:
    return ClassifiedError(diagnostic, classify_message(diagnostic.message))


def taxonomy_csv() -> str:
    """The taxonomy as CSV with header ``type,fragment,class``."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["type", "fragment", "class"])
    for error_type, fragment, error_class, _ in TAXONOMY:
        writer.writerow([error_type.value, fragment, error_class.value])
    return buf.getvalue()
