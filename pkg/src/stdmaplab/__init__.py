"""stdmaplab: standard-map cocycles, Lyapunov bounds, Jacobi spectra and potential theory."""

__version__ = "0.1.0"
