"""Assembly planning for brick models: CAD parsing, string-diagram plans,
expression-based scheduling and a discrete-time build simulator."""

__version__ = "0.1.0"
