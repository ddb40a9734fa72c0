"""Exception hierarchy shared across the package."""


class PerfFuncError(Exception):
    """Base class for all errors raised by perffunc."""


class DomainError(PerfFuncError, ValueError):
    """An argument lies outside the domain of the function (e.g. negative data size)."""


class InfeasiblePerformanceError(PerfFuncError, ValueError):
    """The requested performance level cannot be reached (or is below zero-shot)."""


class DegenerateError(PerfFuncError, ValueError):
    """A coefficient is (numerically) zero and the closed form does not apply."""


class SingularSlopeError(PerfFuncError, ValueError):
    """The isoperf slope is undefined at a point on an axis."""


class InfeasibleError(PerfFuncError, ValueError):
    """No realizable operating point exists for the requested level."""


class FitError(PerfFuncError, RuntimeError):
    """Parameter estimation could not proceed."""


class IllConditionedError(FitError):
    """Kernel matrix factorization failed even after jitter escalation."""


class ValidationError(PerfFuncError, ValueError):
    """Input records failed validation.

    ``problems`` holds ``(row_number, message)`` pairs, row numbers counted
    from 1 for the first data row after the header.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        lines = [f"row {row}: {msg}" for row, msg in self.problems[:20]]
        if len(self.problems) > 20:
            lines.append(f"... and {len(self.problems) - 20} more")
        super().__init__(f"{len(self.problems)} invalid row(s):\n" + "\n".join(lines))


class SchemaError(PerfFuncError, ValueError):
    """A required column is missing from the input file."""


class RenderError(PerfFuncError, ValueError):
    """A figure specification cannot be drawn."""
