"""armcloak: robot-cancellation video pipeline and grasp-mapping simulator."""

__version__ = "0.1.0"
