"""Run manifests: provenance written beside every command's outputs."""

from __future__ import annotations

import hashlib
import json
import platform
import time
from pathlib import Path


def config_hash(payload) -> str:
    """Stable sha256 over a config mapping or raw file bytes."""
    if isinstance(payload, bytes):
        data = payload
    else:
        data = json.dumps(payload, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def write_manifest(path, command: str, config, outputs=()) -> Path:
    from . import __version__

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = {
        "command": command,
        "package_version": __version__,
        "python_version": platform.python_version(),
        "config_hash": config_hash(config),
        "config": config if not isinstance(config, bytes) else None,
        "outputs": [str(o) for o in outputs],
        "written_unix": time.time(),
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, default=str)
        f.write("\n")
    return path
