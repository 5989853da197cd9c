"""Exception types shared across the toolkit."""


class MecError(Exception):
    """Base class for all toolkit errors."""


class CycleDetected(MecError):
    """Fanin edges contain a cycle (corrupt network)."""


class NotACut(MecError):
    """A traversal escaped the claimed leaf set."""


class RootUnreached(MecError):
    """Forward cone collection never reached the root (malformed cut)."""


class InterfaceMismatch(MecError):
    """Two designs differ in PI/PO arity or ordering."""


class OutputMismatch(MecError):
    """A primary-output pair was proven non-equivalent during choice merging."""


class RegisterMismatch(MecError):
    """Latch interfaces of two designs differ."""


class MappingMismatch(MecError):
    """A mapped network's PO/latch bindings do not correspond to the source network."""


class ChoiceViolation(MecError):
    """A choice-class member simulated neither equal nor complementary to its representative."""


class TrivialRepresentative(MecError):
    """An internal used node carries a trivial representative cut."""


class UncoveredNode(MecError):
    """The mapping's cover sweep found a reachable node outside every block."""


class ArityMismatch(MecError):
    """Truth-table length does not match the input count."""


class ParseError(MecError):
    """Malformed input file; carries a position."""

    def __init__(self, message, line=None, offset=None):
        pos = []
        if line is not None:
            pos.append(f"line {line}")
        if offset is not None:
            pos.append(f"offset {offset}")
        if pos:
            message = f"{message} ({', '.join(pos)})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class BudgetExhausted(MecError):
    """A SAT query ran out of its conflict or wall-clock budget."""
