"""Kerr-induced non-Gaussianity of bright squeezed vacuum: Fock-space and phase-space simulation."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"
