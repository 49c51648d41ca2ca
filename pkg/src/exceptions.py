class SpectralError(Exception):
    pass

class InvalidArgument(SpectralError, ValueError):
    pass

class ConfigError(SpectralError):
    pass

class NumericalError(SpectralError, ArithmeticError):
    pass

class UndefinedCentroid(NumericalError):
    pass

class ShapeMismatch(SpectralError):
    pass
