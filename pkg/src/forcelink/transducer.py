"""Microstrip force transducer: geometry, impedance, contact mechanics, phases.

The sensing element is a microstrip transmission line that a press shorts to
ground.  The short is not a point: the contact patch closes a segment [a, b]
whose edges move outward with force, asymmetrically when the press sits away
from the line's center.  Each end of the line sees a reflection whose phase
encodes the distance to its nearest shorting edge, so the two ends together
encode both force magnitude and contact location.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

SPEED_OF_LIGHT = 3.0e8  # m/s


@dataclass(frozen=True)
class SensorGeometry:
    """Physical line geometry; lengths/widths in millimeters."""

    length_mm: float = 80.0
    signal_width_mm: float = 2.5
    ground_width_mm: float = 6.0
    height_mm: float = 0.63
    eps_eff: float = 1.0

    def __post_init__(self):
        for name in ("length_mm", "signal_width_mm", "ground_width_mm", "height_mm"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if not self.eps_eff >= 1.0:
            raise ValueError("eps_eff must be >= 1")


@dataclass(frozen=True)
class MechanicalParams:
    """Phenomenological press model.

    Above the contact threshold the shorted half-width grows as
    w(F) = max_halfwidth * (1 - exp(-(F - threshold)/force_scale)); each
    segment edge moves outward in proportion to the fraction of line on the
    far side of the contact (raised to asymmetry_exponent), so an off-center
    press pushes the edge on its short side farther than the other.
    """

    contact_threshold_n: float = 0.5
    force_scale_n: float = 4.0
    max_halfwidth_mm: float = 13.0
    asymmetry_exponent: float = 1.0

    def __post_init__(self):
        if self.contact_threshold_n < 0.0:
            raise ValueError("contact_threshold_n must be >= 0")
        if not self.force_scale_n > 0.0:
            raise ValueError("force_scale_n must be positive")
        if not self.max_halfwidth_mm > 0.0:
            raise ValueError("max_halfwidth_mm must be positive")
        if self.asymmetry_exponent < 0.0:
            raise ValueError("asymmetry_exponent must be >= 0")


@dataclass(frozen=True)
class TouchEvent:
    """A press of force_n newtons centered at location_mm from port 1.

    The absence of touch is represented by None wherever a TouchEvent is
    accepted.
    """

    force_n: float
    location_mm: float

    def __post_init__(self):
        if self.force_n < 0.0:
            raise ValueError("force must be >= 0")


@dataclass(frozen=True)
class ShortingState:
    """Either open (no short) or a shorted segment [a, b] in mm from port 1."""

    segment: tuple[float, float] | None

    @classmethod
    def open(cls) -> "ShortingState":
        return cls(segment=None)

    @property
    def is_open(self) -> bool:
        return self.segment is None


@dataclass(frozen=True)
class PortPhases:
    """Unwrapped reflection phases seen from each end, radians."""

    phi1: float
    phi2: float
    carrier_hz: float

    @property
    def phi1_wrapped(self) -> float:
        return wrap_phase(self.phi1)

    @property
    def phi2_wrapped(self) -> float:
        return wrap_phase(self.phi2)


def wrap_phase(x: float) -> float:
    """Wrap a phase to (-pi, pi]."""
    w = math.remainder(x, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


def impedance(height_mm: float, width_mm: float) -> float:
    """Characteristic impedance (ohms) of the air-substrate line.

    Z = 60 ln(6h/w + sqrt(1 + (2h/w)^2)); only the h/w ratio matters.
    """
    if not height_mm > 0.0 or not width_mm > 0.0:
        raise ValueError("height and width must be positive")
    x = height_mm / width_mm
    return 60.0 * math.log(6.0 * x + math.sqrt(1.0 + (2.0 * x) ** 2))


def solve_width_ratio(z_target: float, tol_ohm: float = 1e-9) -> float:
    """Width-to-height ratio w/h that realizes a target impedance.

    Bisection on h/w; Z is strictly increasing in h/w, so the bracket is
    expanded until it straddles the target and then halved until the
    impedance mismatch falls under tol_ohm.
    """
    if not z_target > 0.0:
        raise ValueError("target impedance must be positive")
    lo, hi = 1e-12, 1.0
    while impedance(hi, 1.0) < z_target:
        hi *= 2.0
        if hi > 1e9:
            raise ValueError(f"no realizable ratio for {z_target} ohm")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        z = impedance(mid, 1.0)
        if abs(z - z_target) < tol_ohm:
            return 1.0 / mid
        if z < z_target:
            lo = mid
        else:
            hi = mid
    return 1.0 / (0.5 * (lo + hi))


def shorting_segment(touch: TouchEvent | None, mech: MechanicalParams,
                     geom: SensorGeometry) -> ShortingState:
    """Map a touch to the shorted segment [a, b].

    Below the contact threshold the line stays open.  Above it the segment
    spreads from the contact location with saturating half-width w(F); each
    edge moves in proportion to the fraction of line on the far side of the
    contact (asymmetry exponent kappa), and both edges clamp to the line.
    """
    if touch is None or touch.force_n <= mech.contact_threshold_n:
        return ShortingState.open()
    L = geom.length_mm
    lc = touch.location_mm
    if not 0.0 <= lc <= L:
        raise ValueError(f"touch location {lc} mm outside line [0, {L}] mm")
    if mech.max_halfwidth_mm > 0.5 * L:
        raise ValueError("max_halfwidth_mm must not exceed half the line length")
    w = mech.max_halfwidth_mm * (
        1.0 - math.exp(-(touch.force_n - mech.contact_threshold_n) / mech.force_scale_n))
    kappa = mech.asymmetry_exponent
    a = lc - 2.0 * w * (1.0 - lc / L) ** kappa
    b = lc + 2.0 * w * (lc / L) ** kappa
    a = min(max(a, 0.0), lc)
    b = min(max(b, lc), L)
    return ShortingState(segment=(a, b))


def propagation_constant(carrier_hz: float, eps_eff: float) -> float:
    """beta in rad/m."""
    return 2.0 * math.pi * carrier_hz * math.sqrt(eps_eff) / SPEED_OF_LIGHT


def port_phases(state: ShortingState, geom: SensorGeometry,
                carrier_hz: float) -> PortPhases:
    """Reflection phase at each end for a shorting state.

    Open line: both ends see the full round trip, phi = -2 beta L.  Shorted
    segment [a, b]: port 1 sees the round trip to a plus the short's pi flip,
    port 2 likewise to L - b.  Values are unwrapped; wrapped companions are
    exposed on the result.
    """
    if not carrier_hz > 0.0:
        raise ValueError("carrier frequency must be positive")
    beta = propagation_constant(carrier_hz, geom.eps_eff)
    L_m = geom.length_mm * 1e-3
    if state.is_open:
        phi = -2.0 * beta * L_m
        return PortPhases(phi1=phi, phi2=phi, carrier_hz=carrier_hz)
    a, b = state.segment
    phi1 = -2.0 * beta * (a * 1e-3) + math.pi
    phi2 = -2.0 * beta * ((geom.length_mm - b) * 1e-3) + math.pi
    return PortPhases(phi1=phi1, phi2=phi2, carrier_hz=carrier_hz)


def phase_per_mm(carrier_hz: float, eps_eff: float = 1.0) -> float:
    """Round-trip phase change per millimeter of edge travel, degrees."""
    return math.degrees(2.0 * propagation_constant(carrier_hz, eps_eff) * 1e-3)
