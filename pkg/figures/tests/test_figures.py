import os

import numpy as np
import pytest

from maplabfigs.figspec import FigureSpec, SchemaMismatch, load_columns
from maplabfigs.make_figures import default_specs
from maplabfigs.render import render


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Figure-grade acceptance artifacts produced by the primary CLI."""
    from stdmaplab.cli import _acceptance_artifacts, config_hash

    root = tmp_path_factory.mktemp("artifacts")
    prefix = str(root / "acceptance")
    _acceptance_artifacts(prefix, config_hash({"suite": "acceptance-test"}))
    return prefix


def test_all_six_figures_render(artifacts, tmp_path):
    outdir = str(tmp_path / "figs")
    paths = [render(s) for s in default_specs(artifacts, outdir)]
    assert len(paths) == 6
    for p in paths:
        assert os.path.exists(p) and os.path.getsize(p) > 5000


def test_bound_curve_crossing_near_lambda0(artifacts):
    cols = load_columns(f"{artifacts}_bounds_table.csv",
                        ("lambda", "M0", "C", "C_E2", "hadamard_E2",
                         "entropy_lower", "entropy_upper", "pesin_lower"))
    lam = cols["lambda"]
    lower = cols["entropy_lower"]
    idx = np.where(np.diff(np.sign(lower)) > 0)[0]
    assert len(idx) == 1
    i = idx[0]
    cross = lam[i] + (lam[i + 1] - lam[i]) * (-lower[i]) / (lower[i + 1] - lower[i])
    assert cross == pytest.approx(3.1547, abs=0.01)


def test_render_is_deterministic(artifacts, tmp_path):
    spec = FigureSpec("permutation_distribution",
                      (f"{artifacts}_perm_exceedance.csv",),
                      str(tmp_path / "a.png"))
    render(spec)
    first = open(spec.output, "rb").read()
    render(spec)
    assert open(spec.output, "rb").read() == first


def test_schema_mismatch_names_offending_column(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("# stdmaplab v0 config_hash=x\nrank,wrongname\n0,0.1\n")
    spec = FigureSpec("permutation_distribution", (str(bad),),
                      str(tmp_path / "o.png"))
    with pytest.raises(SchemaMismatch) as ei:
        render(spec)
    assert "exceedance" in str(ei.value) or "wrongname" in str(ei.value)


def test_missing_provenance_header_rejected(tmp_path):
    bad = tmp_path / "bad2.csv"
    bad.write_text("rank,exceedance\n0,0.1\n")
    with pytest.raises(SchemaMismatch):
        load_columns(str(bad), ("rank", "exceedance"))


def test_unknown_kind_rejected(tmp_path):
    with pytest.raises(ValueError):
        FigureSpec("nope", ("a.csv",), str(tmp_path / "o.png"))
    with pytest.raises(ValueError):
        FigureSpec("exponent_cdfs", ("only_one.csv",), str(tmp_path / "o.png"))
