"""Digital financial literacy scoring, profiling, modelling, and scenario simulation."""

__version__ = "0.1.0"
