import json
import logging
from pathlib import Path
from typing import Any, Iterable, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def json_safe(value):
    if isinstance(value, dict):
        return {key: json_safe(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(item) for item in value]
    if isinstance(value, (float, np.floating)):
        return float(value) if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def ensure_directory(directory: PathLike) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    return directory


def write_json(path: PathLike, document: Any) -> Path:
    """Writes ``document`` with sorted keys; non-finite numbers become null."""
    path = Path(path)
    ensure_directory(path.parent)
    path.write_text(json.dumps(json_safe(document), indent=2, sort_keys=True, allow_nan=False) + '\n')
    logger.debug(f'wrote {path}')
    return path


def write_jsonl(path: PathLike, documents: Iterable[Any]) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    with path.open('w') as handle:
        for document in documents:
            handle.write(json.dumps(json_safe(document), sort_keys=True, allow_nan=False) + '\n')
    logger.debug(f'wrote {path}')
    return path


def write_frame(path: PathLike, frame: pd.DataFrame) -> Path:
    path = Path(path)
    ensure_directory(path.parent)
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.debug(f'wrote {path} ({len(frame)} rows)')
    return path
