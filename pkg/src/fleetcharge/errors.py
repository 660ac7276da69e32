"""Exception hierarchy shared by every solver stage."""


class FleetChargeError(Exception):
    """Base class for all package errors."""


class InstanceError(FleetChargeError, ValueError):
    """An instance, ordering or config breaks one of its invariants."""


class HorizonExceeded(FleetChargeError):
    """A charging window would run past the last slot of the timeline."""


class InfeasibleDemand(FleetChargeError):
    """Total demand exceeds what the station cap can deliver over the horizon."""


class InfeasibleInstance(FleetChargeError):
    """Every candidate ordering at some rollout stage is infeasible."""


class SizeGuard(FleetChargeError):
    """An exhaustive routine was asked to run beyond its size limit."""
