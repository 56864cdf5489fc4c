"""Figure rendering for blochfem solver outputs.

Consumes only the solver's documented CSV/JSON files and emits static
PNG/SVG images: field heatmaps, dispersion sheets, Brillouin-zone pictures
with group-velocity arrows, and damping-sweep error curves.
"""

from .render import plot_band, plot_brillouin, plot_field, plot_sweep

__version__ = "0.1.0"
