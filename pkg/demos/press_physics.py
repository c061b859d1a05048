"""From finger force to port phases.

The sensor is an 80 mm microstrip line read from both ends.  A press shorts
a segment of the line; each port's reflection then turns around at the near
edge of that segment instead of at the far end.  Harder presses widen the
contact, so the round-trip phase at each port encodes where and how hard.

Run: python3 demos/press_physics.py
"""
import numpy as np

from forcelink.transducer import (MechanicalParams, SensorGeometry,
                                  ShortingState, TouchEvent, impedance,
                                  phase_per_mm, port_phases, shorting_segment,
                                  solve_width_ratio)

geom = SensorGeometry()
mech = MechanicalParams()
carrier = 2.4e9

print(f"line: {geom.length_mm:.0f} mm, trace {geom.signal_width_mm} mm wide, "
      f"{geom.height_mm} mm above ground")
print(f"characteristic impedance: "
      f"{impedance(geom.height_mm, geom.signal_width_mm):.1f} ohm")
ratio = solve_width_ratio(50.0)
print(f"a 50 ohm line would need w/h = {ratio:.3f} "
      f"(w = {ratio * geom.height_mm:.2f} mm at this height)\n")

print(f"phase sensitivity at {carrier / 1e9:.1f} GHz: "
      f"{phase_per_mm(carrier):.2f} deg per mm of edge movement\n")

base = port_phases(ShortingState.open(), geom, carrier)
print(f"no touch: both ports see the full line, phi = {base.phi1:.4f} rad\n")

print("press at mid-line (40 mm): both edges move equally")
print("   F (N)   segment (mm)      dphi1 (deg)  dphi2 (deg)")
for F in (0.4, 1.0, 2.0, 4.0, 8.0):
    state = shorting_segment(TouchEvent(F, 40.0), mech, geom)
    pp = port_phases(state, geom, carrier)
    if state.is_open:
        print(f"  {F:5.1f}   (below contact threshold, line stays open)")
        continue
    a, b = state.segment
    d1 = np.degrees(pp.phi1 - base.phi1)
    d2 = np.degrees(pp.phi2 - base.phi2)
    print(f"  {F:5.1f}   [{a:5.2f}, {b:5.2f}]   {d1:10.2f}  {d2:10.2f}")

print("\npress near port 1 (20 mm): each contact edge moves in proportion")
print("to how much line lies beyond it, so as the force grows port 1's")
print("phase moves three times as fast as port 2's")
print("   F (N)   segment (mm)      dphi1 (deg)  dphi2 (deg)")
for F in (1.0, 2.0, 4.0, 8.0):
    state = shorting_segment(TouchEvent(F, 20.0), mech, geom)
    pp = port_phases(state, geom, carrier)
    a, b = state.segment
    d1 = np.degrees(pp.phi1 - base.phi1)
    d2 = np.degrees(pp.phi2 - base.phi2)
    print(f"  {F:5.1f}   [{a:5.2f}, {b:5.2f}]   {d1:10.2f}  {d2:10.2f}")
