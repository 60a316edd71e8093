class RbnetError(Exception):
    pass


class ProtocolError(RbnetError):
    pass


class ProtocolParseError(ProtocolError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class ConfigurationError(RbnetError):
    pass


class NodeSetMismatch(ConfigurationError):
    pass


class LabelMismatch(ConfigurationError):
    pass


class ExecutionError(RbnetError):
    pass


class DisabledStep(ExecutionError):
    """
    Raised by replay when a step cannot be applied.

    Attributes
    ----------
    index : int
        Position of the offending step in the execution
    reason : str
        Human readable cause
    """

    def __init__(self, index: int, reason: str):
        self.index = index
        self.reason = reason
        super().__init__(f"step {index}: {reason}")


class AlternationError(DisabledStep):
    def __init__(self, index: int):
        super().__init__(index, "communication and reconfiguration steps must alternate")


class InvalidSchedule(ExecutionError):
    pass


class NotCommBounded(ExecutionError):
    pass


class BudgetUnbounded(RbnetError):
    pass


class NotDiverging(RbnetError):
    pass


class NotBalanced(RbnetError):
    pass


class InsufficientCopies(RbnetError):
    pass


class MinskyParseError(RbnetError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


class UnknownFormat(RbnetError):
    pass


class NetParseError(RbnetError):
    pass


class ControlTokenViolation(RbnetError):
    pass
