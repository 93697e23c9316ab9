"""Reed-Muller sieve: Delsarte-Goethals sensing frames and chirp reconstruction."""

__version__ = "0.1.0"
