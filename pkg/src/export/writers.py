"""
Writers for result tables and verdict reports.

Every artifact carries the schema version, a version string for the code,
the fully resolved configuration, its hash and the seed (when the run is
stochastic), so a run can be repeated from the file alone. No timestamps
are written: identical configurations give byte-identical files.
"""

import hashlib
import json
import logging
import subprocess
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd
from pydantic import BaseModel, ConfigDict

import src
from src.core.exceptions import ExportError
from src.core.settings import get_settings

logger = logging.getLogger(__name__)

COMMENT_PREFIX = "# "


class RunMetadata(BaseModel):
    model_config = ConfigDict(frozen=True)

    schema_version: str
    version: str
    command: str
    config: Dict[str, Any]
    config_hash: str
    seed: Optional[int] = None


def _canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(config: Dict[str, Any]) -> str:
    return hashlib.sha256(_canonical_json(config).encode("utf-8")).hexdigest()[:16]


def version_string() -> str:
    """`git describe` of the working tree, or the package version outside a checkout."""
    try:
        result = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            capture_output=True,
            text=True,
            check=True,
            cwd=Path(__file__).resolve().parent,
            timeout=5,
        )
        described = result.stdout.strip()
        if described:
            return f"{src.__version__}+{described}"
    except (OSError, subprocess.SubprocessError):
        pass
    return src.__version__


def build_metadata(command: str, config: Dict[str, Any], seed: Optional[int] = None) -> RunMetadata:
    return RunMetadata(
        schema_version=get_settings().schema_version,
        version=version_string(),
        command=command,
        config=config,
        config_hash=config_hash(config),
        seed=seed,
    )


def _prepare(path: Union[str, Path]) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ExportError(f"cannot create directory for {target}: {e}", component="Export",
                          details={"path": str(target)}) from e
    return target


def write_csv(frame: pd.DataFrame, path: Union[str, Path], metadata: RunMetadata) -> Path:
    """Header comment lines with the JSON metadata, then the table with a header row."""
    target = _prepare(path)
    header = COMMENT_PREFIX + _canonical_json(metadata.model_dump(mode="json"))
    try:
        with open(target, "w", encoding="utf-8", newline="") as handle:
            handle.write(header + "\n")
            frame.to_csv(handle, index=False, lineterminator="\n")
    except OSError as e:
        raise ExportError(f"cannot write {target}: {e}", component="Export",
                          details={"path": str(target)}) from e
    logger.info(f"wrote {len(frame)} rows to {target}")
    return target


def _records(records: Union[pd.DataFrame, Iterable[Any]]) -> List[Any]:
    if isinstance(records, pd.DataFrame):
        return records.to_dict(orient="records")
    return [r.model_dump(mode="json") if isinstance(r, BaseModel) else r for r in records]


def write_json(records: Union[pd.DataFrame, Iterable[Any]], path: Union[str, Path],
               metadata: RunMetadata) -> Path:
    """Envelope {"schema", "metadata", "records"}; pydantic records are dumped in JSON mode."""
    target = _prepare(path)
    envelope = {
        "schema": metadata.schema_version,
        "metadata": metadata.model_dump(mode="json"),
        "records": _records(records),
    }
    try:
        with open(target, "w", encoding="utf-8") as handle:
            json.dump(envelope, handle, indent=2, sort_keys=True, default=str)
            handle.write("\n")
    except OSError as e:
        raise ExportError(f"cannot write {target}: {e}", component="Export",
                          details={"path": str(target)}) from e
    logger.info(f"wrote {len(envelope['records'])} records to {target}")
    return target


def write_table(frame: pd.DataFrame, path: Union[str, Path], metadata: RunMetadata,
                output_format: Optional[str] = None) -> Path:
    output_format = output_format or get_settings().output_format
    if output_format == "csv":
        return write_csv(frame, path, metadata)
    if output_format == "json":
        return write_json(frame, path, metadata)
    raise ExportError(f"unknown output format '{output_format}'", component="Export",
                      details={"format": output_format})


def read_csv(path: Union[str, Path]) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def read_csv_metadata(path: Union[str, Path]) -> Dict[str, Any]:
    """The metadata dict stored in the leading comment line of a CSV artifact."""
    with open(path, encoding="utf-8") as handle:
        first = handle.readline()
    if not first.startswith(COMMENT_PREFIX):
        raise ExportError(f"{path} has no metadata header", component="Export", details={"path": str(path)})
    return json.loads(first[len(COMMENT_PREFIX):])
