class NearSingularJacobian(RuntimeError):
    """Jacobian condition estimate exceeded the configured cap."""

    def __init__(self, condition, cap):
        super().__init__(f"Jacobian condition estimate {condition:.3e} exceeds cap {cap:.1e}")
        self.condition = condition
        self.cap = cap


class InnerStalled(RuntimeError):
    """The inner iteration could not reach the stopping conditions."""


class NonpositiveConstraint(ValueError):
    """An inequality constraint is not strictly positive where it must be."""


class NotInterior(ValueError):
    """The trust-region step touches the boundary of the region."""


class NotApproximatelyKKT(ValueError):
    """Regularity checks were asked for at a point far from KKT."""
