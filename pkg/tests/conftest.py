import os

# the compiled backend reads its thread cap from the environment at import
# time; set it before anything pulls in the package so the in-process
# thread-count tests can switch between 1 and 4 workers
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import pytest  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def _warm_backend():
    # compile (or load from cache) the active backend once so per-test
    # timing, including the acceptance runtime limits, excludes JIT cost
    from molligrad import backend
    backend.warmup()
    yield
