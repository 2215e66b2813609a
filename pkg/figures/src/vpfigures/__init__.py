"""Regenerates report figures from vpcontrol artifact directories.

Reads only the documented artifact formats (CSV tables, JSON sidecars,
``.f64`` state dumps) and renders PNG files next to them: run panels,
landscape curves and heatmaps, and optimization trajectories overlaid on
matching sweeps.
"""

from vpfigures.plots import plot_landscape, plot_optimization, plot_run

__version__ = "0.1.0"

__all__ = ["plot_run", "plot_landscape", "plot_optimization", "__version__"]
