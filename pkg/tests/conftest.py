import pytest

from piisub import builtin_catalog, synth_corpus


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    # CLI settings fall back to these; tests must not inherit them from the host.
    for var in ("PIISUB_RESULTS_DIR", "PIISUB_CORPUS", "PIISUB_POOL_FILE"):
        monkeypatch.delenv(var, raising=False)


@pytest.fixture(scope="session")
def catalog():
    return builtin_catalog()


@pytest.fixture(scope="session")
def small_corpus():
    """20 multilingual synthetic documents, fixed seed."""
    return synth_corpus(20, seed=5)
