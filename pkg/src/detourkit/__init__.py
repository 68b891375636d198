"""detourkit: trajectory analytics for detour and route-choice studies.

Reconstructs commercial-vehicle routing behaviour from probe GPS traces:
map matching onto a road network, gate-based trip filtering, route folding,
and share/travel-time/validation analytics, with a CLI and an HTTP service
on top.
"""

__version__ = "0.1.0"
