"""Error taxonomy shared across the package.

Every failure the library signals deliberately is a subclass of GarnetError,
so the command line front end can map exception classes to exit codes in one
place.  Plain AssertionError means an internal invariant broke and is always
a bug.
"""


class GarnetError(Exception):
    pass


class MalformedInput(GarnetError):
    """An input file or literal does not match its documented shape."""


class DomainMismatch(GarnetError):
    """Two maps that must share a domain (or be composable) do not."""


class CodomainMismatch(GarnetError):
    """Two maps that must share a codomain do not."""


class EnumerationCap(GarnetError):
    """An exhaustive enumeration would exceed the configured cap."""


class ShapeMismatch(GarnetError):
    """Levelwise data does not match the shape of its base category."""


class UnknownObject(GarnetError):
    """Reference to an object or morphism that the base category lacks."""


class NaturalityViolation(GarnetError):
    """A would-be natural transformation fails a naturality square."""


class BoundaryMismatch(GarnetError):
    """Square components do not close up into a commuting square."""


class NoIsoFound(GarnetError):
    """An isomorphism that is guaranteed to exist was not found (a bug)."""


class BackdropViolation(GarnetError):
    """A map required to carry a backdrop certificate fails the test."""


class IterationLimit(GarnetError):
    """A bounded iteration ran out of steps before converging."""


class NotAnAlgebra(GarnetError):
    """Structure map fails the algebra laws it was claimed to satisfy."""


class NotARetract(GarnetError):
    """The supplied pair of squares is not a codomain retract."""


class ColimitNotPreserved(GarnetError):
    """A functor failed to preserve a colimit required for replay."""


class MissingGeneratorWitness(GarnetError):
    """Replay lacks the image data for a generator cell it must rebuild."""


class NotDiscrete(GarnetError):
    """An operation that requires a discrete index category got morphisms."""
