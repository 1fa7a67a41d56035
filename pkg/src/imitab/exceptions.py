class ImitabException(Exception):
    def __init__(self, message: str):
        super().__init__(f"ImitabError: {message}")


class DimensionMismatch(ImitabException):
    pass


class IndexOutOfRange(ImitabException):
    pass


class StochasticExpert(ImitabException):
    pass


class InconsistentExpert(StochasticExpert):
    pass


class EmptyDataset(ImitabException):
    pass


class NotInPiMimic(ImitabException):
    pass


class SolverGuardExceeded(ImitabException):
    pass


class InvalidParameter(ImitabException):
    pass


class DegenerateFit(ImitabException):
    pass


class ConfigError(ImitabException):
    pass
