"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures onto its stable exit-code contract:

    1  I/O or parse failure
    2  membership failure (tuple not in the requested set)
    3  bad parameter
    4  spectral matching failure
    5  logarithm branch edge
"""


class CommPathError(Exception):
    exit_code = 1


class IOFailure(CommPathError):
    exit_code = 1


# -- parameters ---------------------------------------------------------------

class BadParameterError(CommPathError, ValueError):
    exit_code = 3


class NonFiniteError(BadParameterError):
    pass


class ShapeMismatchError(BadParameterError):
    pass


class OddComponentCountError(BadParameterError):
    pass


class BadDeltaError(BadParameterError):
    pass


class EpsilonTooLargeError(BadParameterError):
    pass


class IndexOutOfRangeError(BadParameterError, IndexError):
    pass


class EmptyTargetError(BadParameterError):
    pass


class DiscontinuousJoinError(BadParameterError):
    pass


class ClusterOverlapError(BadParameterError):
    pass


# -- structure / membership -----------------------------------------------------

class MembershipError(CommPathError, ValueError):
    exit_code = 2


class NotHermitianError(MembershipError):
    pass


class NotSkewHermitianError(MembershipError):
    pass


class NotUnitaryError(MembershipError):
    pass


class NotCommutingError(MembershipError):
    pass


class NotNormalError(MembershipError):
    pass


class NotCommutingOPUsError(MembershipError):
    pass


class InvalidOPUError(MembershipError):
    pass


class NotCrossCommutingError(MembershipError):
    pass


class NotMemberError(MembershipError):
    pass


class NotInCubeError(NotMemberError):
    pass


class NotInDiskError(NotMemberError):
    pass


class NotNearlyMemberError(NotMemberError):
    pass


class NotAZeroError(MembershipError):
    pass


class DuplicatePointError(MembershipError):
    pass


# -- matching ---------------------------------------------------------------------

class MatchingError(CommPathError, ValueError):
    exit_code = 4


class DeltaTooLargeError(MatchingError):
    pass


class SpectraOffZeroSetError(MatchingError):
    pass


class NoNearbyZeroError(MatchingError):
    pass


class BranchEdgeError(CommPathError, ValueError):
    exit_code = 5
