"""Hawkes jump-diffusions with general kernels and their exponential-sum Markov lifts."""

__version__ = "0.1.0"
