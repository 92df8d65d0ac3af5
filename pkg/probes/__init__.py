# probes/__init__.py

"""
Initializes the probes package: Lipschitz estimation and hypothesis probes.
"""

from .lipschitz_probe import *
