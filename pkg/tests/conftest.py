import os
from pathlib import Path

import pytest


@pytest.fixture(scope="session", autouse=True)
def session_cache(tmp_path_factory):
    """Point the lattice cache at a session-scoped temp dir.

    Enumerations are shared across the whole test session so repeated probes
    do not re-enumerate, while the repository stays clean.
    """
    cache = tmp_path_factory.mktemp("lattice_cache")
    old = os.environ.get("SPECLAB_CACHE")
    os.environ["SPECLAB_CACHE"] = str(cache)
    yield Path(cache)
    if old is None:
        os.environ.pop("SPECLAB_CACHE", None)
    else:
        os.environ["SPECLAB_CACHE"] = old
