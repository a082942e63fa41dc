"""Runtime error types shared across modules."""


class DclError(Exception):
    """Base for all workbench errors."""


class ValidationError(DclError):
    """Program failed validation; carries the diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msgs = "; ".join(str(d) for d in self.diagnostics[:5])
        super().__init__(f"invalid program: {msgs}")


class InferenceError(DclError):
    """Sampling or query evaluation could not produce a result."""
