"""Neighbor discovery with multipacket reception: analysis, simulation and detectors."""
from mprdisc.kernels import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
