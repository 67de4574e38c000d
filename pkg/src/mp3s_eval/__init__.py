"""Framework-free evaluation toolkit for frozen multi-layer speech
representations.

The package evaluates precomputed layer-stacked frame representations
([L, T, D] per utterance) three ways:

* headless — ABX discriminability and AX verification EER computed directly
  from DTW-aligned cosine similarities, with no trained decoder;
* probed — a minimal time-pooled linear classifier trained jointly with
  softmax layer weights by deterministic full-batch gradient descent;
* analytical — correlations, rankings, and relative differences across
  bundled or user benchmark tables, plus MAC-count accounting for declared
  architectures.

See :mod:`mp3s_eval.cli` for the command-line surface.
"""

__version__ = "0.1.0"

from . import bench, costmodel, headless, layers, probe, store
from ._kernels import BACKEND as KERNEL_BACKEND

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    "bench",
    "costmodel",
    "headless",
    "layers",
    "probe",
    "store",
]
