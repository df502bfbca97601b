"""Exception hierarchy shared by every stage of the pipeline."""


class TashkilError(Exception):
    """Base class for all package errors."""


class DataError(TashkilError):
    """Input data is unusable (CLI exit code 3)."""


class FormatError(TashkilError):
    """A persisted artifact is malformed or from another format version (CLI exit code 4)."""


class LengthMismatch(DataError, ValueError):
    """A diacritic pattern does not fit the word it is applied to."""

    def __init__(self, n_letters, n_marks):
        super().__init__(f"pattern of length {n_marks} cannot be applied to a word of {n_letters} letters")
        self.n_letters = n_letters
        self.n_marks = n_marks


class UnmappableChar(DataError, ValueError):
    def __init__(self, char, offset, direction):
        super().__init__(f"cannot {direction} {char!r} (U+{ord(char):04X}) at offset {offset}")
        self.char = char
        self.offset = offset


class MarkConflict(DataError, ValueError):
    """A letter carries two marks that do not combine into one of the 15 values."""


class IoFailure(DataError, OSError):
    pass


class EmptyCorpus(DataError):
    pass


class UnknownState(TashkilError, KeyError):
    pass


class EmptyColumn(DataError):
    pass


class AllPathsImpossible(TashkilError):
    """Every path through the lattice has probability zero."""


class LetterMismatch(DataError):
    """Reference and hypothesis words do not share the same letters."""

    def __init__(self, ref, hyp, location=None):
        where = f"{location}: " if location else ""
        super().__init__(f"{where}reference {ref!r} and hypothesis {hyp!r} have different letters")
        self.ref = ref
        self.hyp = hyp
        self.location = location


class FormatVersionMismatch(FormatError):
    pass


class CorruptTable(FormatError):
    pass
