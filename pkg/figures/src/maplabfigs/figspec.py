"""Figure specifications and validated CSV loading.

This package is a read-only consumer of the primary package's CSV
artifacts; no numerics are recomputed here.  Every loader validates the
documented column schema and reports the offending column on mismatch.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

KNOWN_KINDS = (
    "orbit_portrait",
    "bound_curve",
    "wiener_transition",
    "wspectrum_bands",
    "permutation_distribution",
    "exponent_cdfs",
)

# documented column schema per figure kind (per input slot)
SCHEMAS: Dict[str, List[Tuple[str, ...]]] = {
    "orbit_portrait": [("x", "y", "seed_id")],
    "bound_curve": [("lambda", "M0", "C", "C_E2", "hadamard_E2",
                     "entropy_lower", "entropy_upper", "pesin_lower")],
    "wiener_transition": [("lambda", "s_nmax"), ("lambda", "s_nmax")],
    "wspectrum_bands": [("re", "im", "indicator")],
    "permutation_distribution": [("rank", "exceedance")],
    "exponent_cdfs": [("value", "cdf"), ("value", "cdf")],
}


class SchemaMismatch(ValueError):
    """Input CSV columns do not match the documented artifact schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: Tuple[str, ...]
    output: str
    title: str = ""
    labels: Tuple[str, str] = ("", "")
    logx: bool = False

    def __post_init__(self):
        if self.kind not in KNOWN_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}")
        want = len(SCHEMAS[self.kind])
        if len(self.inputs) != want:
            raise ValueError(f"{self.kind} needs {want} input file(s)")


def load_columns(path: str, expected: Sequence[str]) -> Dict[str, np.ndarray]:
    """Load a provenance-headed CSV, enforcing the expected column set."""
    with open(path) as f:
        first = f.readline()
        if not first.startswith("#"):
            raise SchemaMismatch(f"{path}: missing provenance header line")
        reader = csv.reader(f)
        header = next(reader)
        for col in expected:
            if col not in header:
                raise SchemaMismatch(f"{path}: missing column {col!r}")
        extra = [c for c in header if c not in expected]
        if extra:
            raise SchemaMismatch(f"{path}: unexpected column {extra[0]!r}")
        rows = [row for row in reader if row]
    data = np.array(rows, dtype=float)
    return {c: data[:, header.index(c)] for c in expected}


def load_inputs(spec: FigureSpec) -> List[Dict[str, np.ndarray]]:
    return [load_columns(path, cols)
            for path, cols in zip(spec.inputs, SCHEMAS[spec.kind])]
