"""Maximum-likelihood estimation from samples and lower record values for
distributions with CDF ``exp(-B(theta) A(x))``."""

__version__ = "0.1.0"
