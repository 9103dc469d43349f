"""Numerical laboratory for geometric quantization on low-dimensional phase spaces."""

try:
    from quantum_cycles._version import __version__
except ImportError:  # running from a source checkout without the VCS hook
    __version__ = "0.0.0"
