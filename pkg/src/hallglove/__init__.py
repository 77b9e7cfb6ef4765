"""Hall-effect sign-language glove, end to end at desk scale.

Simulates the glove's sensor physics (magnet-sensor distance, inverse-cube
flux, ratiometric Hall voltage, ADC, IMU), trains a from-scratch MLP on
synthetic multi-subject gesture data, models the firmware loop and wire
protocol, and exports weights for embedded deployment.
"""

__version__ = "0.1.0"
