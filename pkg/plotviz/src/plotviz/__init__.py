"""Figure regeneration for misinformation-simulation batch outputs."""

from .io import PlotDataError, load_algorithm_series, load_summary_means, moving_average
from .plots import FigureSpec, plot_infection, plot_mrd, plot_summary

__version__ = "0.1.0"
