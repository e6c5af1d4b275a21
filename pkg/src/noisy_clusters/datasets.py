"""Locate local copies of the public signed-network edge lists.

Nothing is downloaded. A dataset argument is either a file path or one of the
short names below, looked up in ``$NOISY_CLUSTERS_DATA`` (default ``./data``).
"""

from __future__ import annotations

import os
from pathlib import Path

KNOWN = {
    "wikipedia": ["wikiElec.ElecBs3.txt.gz", "wikiElec.ElecBs3.txt", "wiki-Elec.txt.gz",
                  "wiki-Elec.txt", "soc-sign-wikipedia.txt.gz", "soc-sign-wikipedia.txt"],
    "slashdot": ["soc-sign-Slashdot090221.txt.gz", "soc-sign-Slashdot090221.txt"],
    "epinions": ["soc-sign-epinions.txt.gz", "soc-sign-epinions.txt"],
}

# published sizes after ingest, used for sanity checks
EXPECTED_SIZE = {"wikipedia": (7118, 103747)}


def data_dir() -> Path:
    return Path(os.environ.get("NOISY_CLUSTERS_DATA", "data"))


def resolve_dataset(name_or_path) -> Path:
    """Path for a dataset name or an explicit file; raises FileNotFoundError."""
    path = Path(name_or_path)
    if path.is_file():
        return path
    key = str(name_or_path).lower()
    if key in KNOWN:
        root = data_dir()
        for fname in KNOWN[key]:
            if (root / fname).is_file():
                return root / fname
        raise FileNotFoundError(
            f"dataset {key!r} not found in {root}; expected one of {', '.join(KNOWN[key])} "
            f"(set NOISY_CLUSTERS_DATA to the directory holding it)")
    raise FileNotFoundError(f"no such dataset file: {name_or_path}")
