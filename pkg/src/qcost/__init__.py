"""Static expected-cost analysis for mixed classical-quantum IMQ programs."""

__version__ = "0.1.0"
