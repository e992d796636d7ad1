#!/usr/bin/env python3
"""CSV output for analysis tables."""

from pathlib import Path
from typing import Optional, Union

import pandas as pd

FLOAT_FORMAT = "%.6f"


def write_table(
    frame: pd.DataFrame,
    path: Union[str, Path],
    header_comment: Optional[str] = None,
    note: Optional[str] = None,
) -> Path:
    """Write ``frame`` as CSV after optional ``#`` comment lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for line in (header_comment, note):
            if line:
                handle.write(f"# {line}\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    return path
