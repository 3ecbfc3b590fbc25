"""Hyperbolic metrics with prescribed boundary lengths on ideally triangulated bordered surfaces."""
from .errors import (AdmissibilityError, DomainError, NonConvergenceError, NumericError,
                     ProbeError, RangeError, StiffnessError, YamabeError)
from .kernel import available_backends, get_backend, set_backend
from .surface import (Edge, Face, IdealTriangulation, Metric, boundary_lengths,
                      pair_of_pants, tetrahedral_surface, validate)
from .solver import FlowConfig, NewtonConfig, flow_solve, newton_solve, probe_limits

__all__ = [
    "AdmissibilityError", "DomainError", "NonConvergenceError", "NumericError", "ProbeError",
    "RangeError", "StiffnessError", "YamabeError",
    "available_backends", "get_backend", "set_backend",
    "Edge", "Face", "IdealTriangulation", "Metric", "boundary_lengths",
    "pair_of_pants", "tetrahedral_surface", "validate",
    "FlowConfig", "NewtonConfig", "flow_solve", "newton_solve", "probe_limits",
]
