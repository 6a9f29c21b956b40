"""
Origon: construction and analysis of origami-extrusion 3D gadgets.
"""

__version__ = "0.2.0"
