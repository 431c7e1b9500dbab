"""Exception types shared across the toolkit."""


class AcmdpError(Exception):
    """Base class for all toolkit errors."""


class InstanceParseError(AcmdpError):
    """Instance document is not well-formed (bad JSON, missing fields, wrong types)."""


class InstanceSemanticError(AcmdpError):
    """Instance document is well-formed but inconsistent (bad indices, bad rows)."""


class DocumentError(AcmdpError):
    """A solution document is malformed or inconsistent with its instance."""


class InvalidModelError(AcmdpError):
    """A model failed validation where a valid model is required."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid model: " + "; ".join(self.violations))


class EnumerationGuardError(AcmdpError):
    """A brute-force enumeration would exceed its combinatorial guard."""


class InternalInconsistencyError(AcmdpError):
    """An internal contract that should be unbreakable was broken (solver bug or
    numerically hostile input)."""


class InfeasibleStageError(AcmdpError):
    """A lexicographic stage beyond the first came back infeasible even after
    widening the stage pins."""


class EmptyAbsorbingSetError(AcmdpError):
    """Greedy-policy extraction could not find a nonempty closed subset of the
    ACOE equality states at the working tolerance."""


class MultichainError(AcmdpError):
    """Relative value iteration refused an instance that is not unichain."""


class NonConvergenceError(AcmdpError):
    """An iterative method did not reach its tolerance within the step budget."""

    def __init__(self, message, final_span=None):
        super().__init__(message)
        self.final_span = final_span
