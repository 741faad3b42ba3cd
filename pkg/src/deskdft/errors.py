"""Exception types shared across the engine."""


class DeskDFTError(Exception):
    """Base class for engine errors."""


class MoleculeError(DeskDFTError, ValueError):
    """Invalid molecular geometry, element, or electron count."""


class XYZParseError(DeskDFTError, ValueError):
    """Malformed XYZ text or manifest entry."""


class BasisError(DeskDFTError, ValueError):
    """Unknown basis, parse failure, or unsupported angular momentum."""


class ResourceLimitError(DeskDFTError, RuntimeError):
    """Estimated integral storage above the configured budget."""


class DimensionError(DeskDFTError, ValueError):
    """Matrix/tensor dimensions inconsistent with the AO basis."""
