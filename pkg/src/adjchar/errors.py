"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line front end:
2 for domain/geometry problems, 3 for physics preconditions, 4 for I/O
and format problems. Verification failures (exit 1) are not exceptions.
"""


class AdjcharError(Exception):
    exit_code = 1


# physics preconditions -------------------------------------------------------

class NonPhysicalState(AdjcharError, ValueError):
    exit_code = 3


class SubsonicInput(AdjcharError, ValueError):
    exit_code = 3


class StagnantState(AdjcharError, ValueError):
    exit_code = 3


class SubsonicAtStart(AdjcharError):
    exit_code = 3


class MissingAdjoint(AdjcharError):
    exit_code = 3


class FamilyMismatch(AdjcharError, ValueError):
    exit_code = 3


class TooFewPoints(AdjcharError):
    exit_code = 3


class StepFailure(AdjcharError):
    exit_code = 3


# geometry ---------------------------------------------------------------------

class DegenerateDirection(AdjcharError, ValueError):
    exit_code = 2


class OutOfDomain(AdjcharError):
    """Query point lies outside the grid footprint (or outside a clip disk)."""

    exit_code = 2


class OutOfDomainAtStart(OutOfDomain):
    pass


class OutOfProfileDomain(AdjcharError, ValueError):
    exit_code = 2


# I/O ----------------------------------------------------------------------------

class FormatError(AdjcharError, ValueError):
    exit_code = 4

    def __init__(self, message, line=None, column=None):
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
        self.line = line
        self.column = column


class DimensionMismatch(FormatError):
    pass


class IoError(AdjcharError, OSError):
    exit_code = 4
