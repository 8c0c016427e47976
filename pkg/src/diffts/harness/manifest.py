"""Machine-readable run manifest: resolved configuration plus library versions."""

import hashlib
import json
import platform

import numpy as np
import scipy


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(command, config=None, outputs=(), extra=None):
    from .. import __version__

    doc = {
        "command": command,
        "versions": {"diffts": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "config": config.as_dict() if config is not None else None,
        "outputs": {p: file_digest(p) for p in outputs},
    }
    if extra:
        doc.update(extra)
    return doc


def write_manifest(path, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, default=_default)
        fh.write("\n")


def _default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, tuple):
        return list(obj)
    return str(obj)
