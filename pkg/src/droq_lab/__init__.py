"""DroQ laboratory: dropout Q-function ensembles and their baselines on a numpy autodiff core."""

__version__ = "0.1.0"
