"""Rear-parking pedestrian risk assessment toolkit.

Combines a vehicle-relative zone partition of the area behind the rear
bumper with driver mirror-gaze awareness to score per-pedestrian collision
risk, fused through a layered time-indexed store.  Includes a scenario
simulator, replay/evaluation harness, CLI and HTTP service.
"""

__version__ = "0.1.0"
