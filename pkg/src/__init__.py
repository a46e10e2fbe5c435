"""Simulator of a uni-directional Michelson-Faraday phase-coding QKD link."""

__version__ = "0.1.0"
