"""Exception hierarchy shared across the engine."""


class FlowError(Exception):
    """Base class for all engine errors."""

    code = "internal"


class MalformedInput(FlowError):
    code = "bad_request"


class EmptyDataset(FlowError):
    code = "bad_request"


class InvalidSpacing(FlowError):
    code = "bad_request"


class InvalidId(FlowError):
    code = "not_found"


class InvalidConfig(FlowError):
    code = "bad_request"


class LevelMismatch(FlowError):
    code = "bad_request"


class DegenerateGraph(FlowError):
    code = "bad_request"


class DegenerateData(FlowError):
    code = "bad_request"


class InvalidK(FlowError):
    code = "bad_request"


class LengthMismatch(FlowError):
    code = "bad_request"


class EmptySelection(FlowError):
    code = "bad_request"


class NotALeaf(FlowError):
    code = "conflict"


class NotInternal(FlowError):
    code = "conflict"


class NotSiblings(FlowError):
    code = "conflict"


class InvalidNode(FlowError):
    code = "not_found"
