"""Backend selection for the batch-evaluation hot paths.

Two interchangeable implementations exist: a numba one (jitted, threaded,
parallel over samples) and a pure-numpy one. The MOLLIGRAD_BACKEND
environment variable picks one:

    auto   (default) numba when importable, else numpy
    numba  require numba, fail loudly if missing
    numpy  force the fallback

The choice is resolved once per process at first use. Thread count for the
numba backend comes from NUMBA_NUM_THREADS, which must be set before numba
is first imported (the CLI's --threads flag does exactly that). Results
within one backend are bit-identical across runs and thread counts; across
backends they agree to ~1e-12 (different summation orders).
"""

import importlib
import os

from ..errors import ConfigInvalid

_CHOICES = ("auto", "numba", "numpy")
_active = None


def _load(name):
    if name == "numpy":
        return importlib.import_module(".numpy_impl", __package__)
    if name == "numba":
        try:
            return importlib.import_module(".numba_impl", __package__)
        except ImportError as e:
            raise ConfigInvalid(
                "MOLLIGRAD_BACKEND=numba but numba is not installed "
                "(pip install molligrad[speed])") from e
    raise ConfigInvalid(f"unknown backend {name!r}, expected one of {_CHOICES}")


def get_impl(name: str):
    """Load a backend by name, bypassing the env-var cache (benchmarks use this)."""
    if name == "auto":
        try:
            return _load("numba")
        except ConfigInvalid:
            return _load("numpy")
    return _load(name)


def impl():
    """The process-wide active backend module."""
    global _active
    if _active is None:
        choice = os.environ.get("MOLLIGRAD_BACKEND", "auto").strip().lower()
        if choice not in _CHOICES:
            raise ConfigInvalid(
                f"MOLLIGRAD_BACKEND={choice!r}, expected one of {_CHOICES}")
        _active = get_impl(choice)
    return _active


def active_name() -> str:
    return impl().name


def warmup():
    impl().warmup()
