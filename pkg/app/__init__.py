# app/__init__.py

"""
OCEAN simulator - ad hoc network routing under misbehaving nodes
"""

__version__ = "0.1.0"
