import pytest

from amanda import kb as kb_mod
from amanda import nlu


@pytest.fixture(scope="session")
def bundled_kb():
    return kb_mod.load_bundled_kb()


@pytest.fixture(scope="session")
def bundled_classifier(bundled_kb):
    examples, labels = nlu.load_training_corpus(kb_mod.BUNDLED_NLU_CORPUS_PATH)
    return nlu.train_intents(examples, labels)


@pytest.fixture(scope="session")
def bundled_model_path(bundled_classifier, tmp_path_factory):
    path = tmp_path_factory.mktemp("nlu") / "nlu.ckpt"
    bundled_classifier.save(path)
    return path
