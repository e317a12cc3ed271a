"""Exception hierarchy shared across the weld-cell stack."""


class WeldCellError(Exception):
    """Base class for all weld-cell errors."""


# --- geometry / fitting ---------------------------------------------------

class WorkspaceViolation(WeldCellError):
    """A requested structure or pose exceeds the 900 x 700 mm work area."""


class DegenerateFit(WeldCellError):
    """Point set is collinear or otherwise does not define a plane."""


class NoPlaneFound(WeldCellError):
    """RANSAC consensus never reached min_inliers."""


class NoThreePlanes(WeldCellError):
    """Fewer than three pairwise non-parallel planes in the scene."""


class ParallelPlanes(WeldCellError):
    """Two planes are (anti)parallel and have no intersection line."""


class DegenerateCorner(WeldCellError):
    """Three planes whose normals are linearly dependent."""


class EmptySeam(WeldCellError):
    """No points fall inside the seam measurement band."""


class UndefinedBisector(WeldCellError):
    """Adjacent plate normals are antiparallel; the torch bisector vanishes."""


# --- calibration ----------------------------------------------------------

class UnderdeterminedCalibration(WeldCellError):
    """Flange rotations too similar to separate tool offset from pivot point."""


class DegenerateOrientation(WeldCellError):
    """Orientation points are coincident or collinear."""


# --- program model --------------------------------------------------------

class EmptySelection(WeldCellError):
    """Selected weld length is zero or negative."""


class LengthExceedsMax(WeldCellError):
    """Selected weld length is longer than the measured seam."""


class ParseError(WeldCellError):
    """Malformed program or cloud file. Carries 1-based line (and column)."""

    def __init__(self, message, line=0, column=0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
        self.column = column


class LoadError(WeldCellError):
    """The simulated robot rejected an uploaded program."""


# --- state machines / protocol --------------------------------------------

class IllegalState(WeldCellError):
    """Command not permitted in the current state."""


class AddressInUse(WeldCellError):
    """Broker bind address already taken."""


class ConnectionLost(WeldCellError):
    """Peer closed the connection mid-conversation."""


class FrameTooLarge(WeldCellError):
    """Frame length prefix exceeds the 16 MiB cap."""


class DecodeError(WeldCellError):
    """Frame bytes could not be decoded into a protocol message."""


class ProtocolError(WeldCellError):
    """Protocol-level failure on the operator side (timeout, refused job)."""
