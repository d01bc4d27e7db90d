"""P1 finite-element realization of trace/extension operators and harmonic Bergman kernels."""

from .disk_oracle import DiskMode, expected_spectrum
from .embedding import EmbeddingSystem, build_embedding_system
from .fem import FemMatrices, OutOfDomainError, assemble, evaluate, locate
from .gram import InnerProductSpace, LinOp, SpectralDecomp, adjoint, power, pseudo_inverse, self_adjoint_eig
from .kernels import BergmanBasis, KernelField, NotInSpaceError, compute_basis, kernel_eval, lions_formula, reproduce
from .mesh import Mesh, MeshError, MeshFormatError, generate, read_mesh, write_mesh
from .pipeline import Systems, build_systems
from .trace import TraceSystem, build_trace_system
from .verify import IdentityResult, run_identity_suite

__all__ = [
    "BergmanBasis", "DiskMode", "EmbeddingSystem", "FemMatrices", "IdentityResult",
    "InnerProductSpace", "KernelField", "LinOp", "Mesh", "MeshError", "MeshFormatError",
    "NotInSpaceError", "OutOfDomainError", "SpectralDecomp", "Systems", "TraceSystem",
    "adjoint", "assemble", "build_embedding_system", "build_systems", "build_trace_system",
    "compute_basis", "evaluate", "expected_spectrum", "generate", "kernel_eval", "lions_formula",
    "locate", "power", "pseudo_inverse", "read_mesh", "reproduce", "run_identity_suite",
    "self_adjoint_eig", "write_mesh",
]
