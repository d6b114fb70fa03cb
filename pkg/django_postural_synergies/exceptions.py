class SynergyException(Exception):
    pass


class IngestError(SynergyException):
    pass


class ResampleError(SynergyException):
    pass


class FilterError(SynergyException):
    pass


class BinningError(SynergyException):
    pass


class FactorizationError(SynergyException):
    pass


class BalanceError(SynergyException):
    pass


class SimulationError(SynergyException):
    pass


class CableError(SimulationError):
    pass


class BoundaryError(SimulationError):
    pass


class StatsError(SynergyException):
    pass


class PipelineError(SynergyException):
    def __init__(self, stage: str, cause, trial_id=None):
        self.stage = stage
        self.trial_id = trial_id
        self.cause = cause
        where = f" trial {trial_id}" if trial_id is not None else ""
        super().__init__(f"[{stage}]{where}: {cause}")
