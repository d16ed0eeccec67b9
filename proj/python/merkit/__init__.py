"""Feature-selection and regression benchmarking toolkit for valence-arousal emotion data."""

from ._core import *  # noqa: F401,F403
