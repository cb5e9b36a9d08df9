"""Atomic file writes and small readers shared by the CLI and the experiments."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    """Write ``text`` to a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def csv_text(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def parse_int_list(text: str) -> list[int]:
    """Integers from a JSON array or a comma/whitespace separated list."""
    text = text.strip()
    if text.startswith("["):
        return [int(v) for v in json.loads(text)]
    return [int(tok) for tok in text.replace(",", " ").split()]


def read_int_list(path: str | os.PathLike) -> list[int]:
    return parse_int_list(Path(path).read_text())


def read_events_csv(path: str | os.PathLike, one_based: bool = True) -> list[tuple[int, int]]:
    """Events from a ``step,node,new_opinion`` (or ``t,node,new_opinion``) CSV."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        shift = 1 if one_based else 0
        return [(int(r["node"]) - shift, int(r["new_opinion"])) for r in reader]
