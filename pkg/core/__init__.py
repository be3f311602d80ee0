"""Core modules of the APELE toolkit: wavefunction input, quadrature, fields,
model holes, populations and diagnostics."""

from .errors import ApeleError
