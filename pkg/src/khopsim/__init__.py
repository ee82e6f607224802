"""k-hop similar graph generation and GCN disagreement experiments."""
from ._kernels import BACKEND, INFINITY

__version__ = "0.1.0"
