"""Online bin packing under random arrival orders, checked with exact arithmetic."""

__version__ = "0.1.0"
