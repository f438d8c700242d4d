"""Numerical laboratory for intersections of theta divisors with their
multiplication-by-n images on complex tori."""

__version__ = "0.1.0"

from .errors import TorilabError
from .torus import AbelianTorus, Endomorphism, TorsionPoint, make_torus
from .theta import ThetaCharacteristic, theta
from .divisor import ThetaDivisor

__all__ = [
    "AbelianTorus",
    "Endomorphism",
    "ThetaCharacteristic",
    "ThetaDivisor",
    "TorilabError",
    "TorsionPoint",
    "make_torus",
    "theta",
]
