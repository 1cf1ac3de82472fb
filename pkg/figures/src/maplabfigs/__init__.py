"""maplabfigs: read-only figure rendering for stdmaplab CSV artifacts."""

__version__ = "0.1.0"
