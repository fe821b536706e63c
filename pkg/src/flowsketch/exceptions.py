class FlowSketchError(Exception):
    pass


class UsageError(FlowSketchError, ValueError):
    pass


class ConfigurationError(FlowSketchError):
    pass


class ConfigFileError(ConfigurationError):
    def __init__(self, message: str, path=None, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class AlgorithmNotFound(FlowSketchError):
    pass


class TraceInputError(FlowSketchError):
    def __init__(self, message: str, path=None, line: int | None = None, field: str | None = None):
        self.path = path
        self.line = line
        self.field = field
        location = []
        if path is not None:
            location.append(str(path))
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        prefix = ", ".join(location)
        super().__init__(f"{prefix}: {message}" if prefix else message)
