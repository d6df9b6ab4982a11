import logging
import os
import sys

import pytest

# The ggsum package and main.py live in backend/
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'backend')))


@pytest.fixture
def log_dir(tmp_path):
    return str(tmp_path / 'logs')


@pytest.fixture
def restore_root_logging():
    """setup_logging replaces the root handlers; put the originals back afterwards."""
    root = logging.getLogger()
    handlers, level = list(root.handlers), root.level
    yield root
    for handler in list(root.handlers):
        if handler not in handlers:
            handler.close()
        root.removeHandler(handler)
    for handler in handlers:
        root.addHandler(handler)
    root.setLevel(level)
