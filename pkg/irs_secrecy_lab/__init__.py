"""IRS Secrecy Lab: hierarchical learning and alternating optimization for secure spectrum sharing with multiple IRSs."""

__version__ = "0.1.0"
