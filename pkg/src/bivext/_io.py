import hashlib
import json
import os
import tempfile
from collections.abc import Iterator
from contextlib import contextmanager
from os import PathLike
from pathlib import Path
from typing import Any, TextIO

import pandas as pd


__all__ = [
    "atomic_open",
    "file_digest",
    "read_json",
    "write_csv",
    "write_json",
]


FLOAT_FORMAT = "%.17g"


@contextmanager
def atomic_open(path: str | PathLike[str], /) -> Iterator[TextIO]:
    """
    Opens a temporary file next to `path` for writing and moves it over `path` on success.

    On failure the temporary file is removed and `path` is left untouched.
    """

    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def write_csv(frame: pd.DataFrame, path: str | PathLike[str], /) -> None:
    with atomic_open(path) as f:
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_json(data: Any, path: str | PathLike[str], /) -> None:
    with atomic_open(path) as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path: str | PathLike[str], /) -> Any:
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def file_digest(path: str | PathLike[str], /) -> str:
    """
    Returns the hex SHA-256 digest of a file's bytes.
    """

    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()
