class FrontendError(Exception):
    """Problem with the source program, with an optional position."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.msg, self.line, self.col = msg, line, col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + msg)


class ParseError(FrontendError):
    pass


class TypeCheckError(FrontendError):
    pass


class UnsupportedFeature(FrontendError):
    """Input outside the analysable fragment (parametrised registers, unknown gates)."""
