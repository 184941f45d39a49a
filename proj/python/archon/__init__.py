"""Python access to the archon proof-orchestration core.

Every function takes a workspace root and returns plain Python data decoded from the
native layer's JSON output. Failures raise ArchonError.
"""

import json
import os
from pathlib import Path

_templates = Path(__file__).with_name("templates")
if _templates.is_dir():
    os.environ.setdefault("ARCHON_TEMPLATES", str(_templates))

from . import _core  # noqa: E402
from ._core import ArchonError  # noqa: E402

__all__ = ["ArchonError", "scan", "check", "verify", "search", "review", "status", "init", "run", "replay", "cli"]


def scan(root):
    return json.loads(_core.scan(str(root)))


def check(root):
    return json.loads(_core.check(str(root)))


def verify(root, record=False):
    return json.loads(_core.verify(str(root), record))


def search(corpus, query, k=5):
    return json.loads(_core.search(str(corpus), query, k))


def review(root):
    return json.loads(_core.review(str(root)))


def status(root):
    return json.loads(_core.status(str(root)))


def init(root, template=None, force=False):
    _core.init(str(root), template, force)


def run(root, replay=False, stop_at=None, resume=False):
    return json.loads(_core.run(str(root), replay, stop_at, resume))


def replay(root, scratch=None):
    return json.loads(_core.replay(str(root), None if scratch is None else str(scratch)))


def cli(*args):
    """Runs the command line in-process and returns (exit_code, stdout, stderr)."""
    return _core.cli([str(a) for a in args])
