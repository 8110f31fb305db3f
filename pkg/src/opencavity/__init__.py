"""Open-microcavity Purcell modelling for colour-centre emitters.

Modules: ``spectrum`` (emitter lines and sidebands), ``cavity`` (Gaussian
resonator modes), ``dbr`` (multilayer mirrors and standing waves), ``dipole``
(dipole-pair orientation), ``purcell`` (ZPL coupling), ``inhomogeneous``
(cavity jitter) and ``analysis`` (saturation, lifetime and g2 reductions).
"""
__version__ = "0.1.0"
