"""Error types. Each carries a short machine-readable ``code``."""


class MarketError(ValueError):
    code = "error"


class InvalidRange(MarketError):
    code = "invalid-range"


class NotSorted(MarketError):
    code = "not-sorted"


class NegativeInput(MarketError):
    code = "negative-input"


class AtomsPresent(MarketError):
    code = "atoms-present"


class CellMismatch(MarketError):
    code = "cell-mismatch"


class EmptyGame(MarketError):
    code = "empty-game"


class NotCoarseNash(MarketError):
    code = "not-coarse-nash"


class MalformedDistribution(MarketError):
    code = "malformed-distribution"


class ScriptedMoveNotImproving(MarketError):
    code = "scripted-move-not-improving"


class EmptySubset(MarketError):
    code = "empty-subset"


class NonIncreasingFunction(MarketError):
    code = "non-increasing-function"


class ArityMismatch(MarketError):
    code = "arity-mismatch"


class InvalidPermutation(MarketError):
    code = "invalid-permutation"


class GenericityViolation(MarketError):
    code = "genericity-violation"


class ZeroLoadProducer(MarketError):
    code = "zero-load-producer"


class SearchSpaceTooLarge(MarketError):
    code = "search-space-too-large"


class SchemaError(MarketError):
    code = "schema-error"

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class InvariantViolation(MarketError):
    code = "invariant-violation"


class UnknownCommand(MarketError):
    code = "unknown-command"
