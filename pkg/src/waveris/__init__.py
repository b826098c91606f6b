"""Standing-wave biasing of varactor-loaded reconfigurable intelligent surfaces.

Modules: ``varactor`` (bias tables), ``metasurface`` (unit-cell circuit and
phase maps), ``biasline`` (standing waves and samplers), ``beamform``
(patterns and SLNR), ``optimize`` (configuration search) and ``cli``.
"""
__version__ = "0.1.0"
