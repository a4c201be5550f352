"""Moment maps, gradient flows and detection checks for brackets and nilpotent matrices."""
__version__ = "0.1.0"
