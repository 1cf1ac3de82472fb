"""Counter-based random streams.

All randomness in the package flows through Philox streams keyed by a
root seed plus a task index, so ensemble sweeps are reproducible and
independent of execution order or thread count.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, task: int = 0) -> np.random.Generator:
    """Return the Philox stream for (seed, task)."""
    return np.random.Generator(np.random.Philox(key=np.array([seed, task], dtype=np.uint64)))
