"""Exception types shared across the package."""


class SheathsimError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(SheathsimError):
    """Invalid run configuration.  Carries the full list of findings."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SolverError(SheathsimError):
    """A numerical solve failed (divergence, vacuum, iteration cap)."""


class VacuumError(SolverError):
    """Density fell below the vacuum floor during a run."""


class NewtonError(SolverError):
    """The damped Newton iteration for the potential did not converge."""
