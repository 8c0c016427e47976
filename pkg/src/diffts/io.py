"""Binary file formats for models, calibrations, datasets and chain caches.

All integers and floats are little-endian; the byte layouts are documented in
``docs/formats.md``. Every file starts with an 8-byte magic and a ``u32``
format version.
"""

import os
import struct

import numpy as np

from .calibration import CalibratedVariances, CalibrationMode
from .data import ImperfectDataset
from .diffusion import DenoiserModel, TargetMode
from .errors import IngestionError
from .schedule import build_schedule

VERSION = 1
MODEL_MAGIC = b"DTSMODEL"
SIGMA_MAGIC = b"DTSSIGMA"
CLEAN_MAGIC = b"DTSCLEAN"
IMPERFECT_MAGIC = b"DTSIMPER"
CHAIN_MAGIC = b"DTSCHAIN"

_TARGETS = [TargetMode.CLEAN, TargetMode.NOISE]
_MODES = [CalibrationMode.FULL, CalibrationMode.LAST_STEP_ONLY, CalibrationMode.NONE]
F64 = np.dtype("<f8")


class _Reader:
    def __init__(self, buf, path):
        self.buf, self.pos, self.path = buf, 0, path

    def unpack(self, fmt):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.buf):
            raise IngestionError(f"{self.path}: truncated file")
        vals = struct.unpack_from(fmt, self.buf, self.pos)
        self.pos += size
        return vals

    def floats(self, count):
        nbytes = count * 8
        if self.pos + nbytes > len(self.buf):
            raise IngestionError(f"{self.path}: truncated float section")
        arr = np.frombuffer(self.buf, dtype=F64, count=count, offset=self.pos).astype(np.float64)
        self.pos += nbytes
        return arr

    def raw(self, nbytes):
        if self.pos + nbytes > len(self.buf):
            raise IngestionError(f"{self.path}: truncated section")
        out = self.buf[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return out


def _open(path, magic):
    with open(path, "rb") as fh:
        buf = fh.read()
    r = _Reader(buf, path)
    got = r.raw(8) if len(buf) >= 8 else b""
    if got != magic:
        raise IngestionError(f"{path}: not a {magic.decode()} file")
    (version,) = r.unpack("<I")
    if version != VERSION:
        raise IngestionError(f"{path}: unsupported format version {version}")
    return r


def _floats(arr):
    return np.ascontiguousarray(arr, dtype=F64).tobytes()


def save_model(model, path):
    s = model.schedule
    widths = model.hidden
    head = MODEL_MAGIC + struct.pack("<IIIIBI", VERSION, model.dim, s.n_steps, model.emb_dim,
                                     _TARGETS.index(model.target), len(widths))
    head += struct.pack(f"<{len(widths)}I", *widths)
    head += struct.pack("<ddQ", s.one_minus_alpha_first, s.one_minus_alpha_last, model.params.size)
    with open(path, "wb") as fh:
        fh.write(head + _floats(model.params))


def load_model(path):
    r = _open(path, MODEL_MAGIC)
    dim, L, emb, target, n_hidden = r.unpack("<IIIBI")
    widths = r.unpack(f"<{n_hidden}I")
    first, last, n_params = r.unpack("<ddQ")
    params = r.floats(n_params)
    schedule = build_schedule(L, first, last)
    try:
        return DenoiserModel(dim, schedule, widths, emb, _TARGETS[target], params=params)
    except (ValueError, IndexError) as exc:
        raise IngestionError(f"{path}: inconsistent model header ({exc})")


def save_sigma(sigma, path):
    head = SIGMA_MAGIC + struct.pack("<IIIB", VERSION, sigma.n_steps, sigma.dim, _MODES.index(sigma.mode))
    with open(path, "wb") as fh:
        fh.write(head + _floats(sigma.sigma))


def load_sigma(path):
    r = _open(path, SIGMA_MAGIC)
    L, d, mode = r.unpack("<IIB")
    return CalibratedVariances(r.floats(L * d).reshape(L, d), _MODES[mode])


def save_dataset(data, path):
    data = np.asarray(data, dtype=np.float64)
    n, d = data.shape
    with open(path, "wb") as fh:
        fh.write(CLEAN_MAGIC + struct.pack("<IQI", VERSION, n, d) + _floats(data))


def load_dataset(path):
    r = _open(path, CLEAN_MAGIC)
    n, d = r.unpack("<QI")
    return r.floats(n * d).reshape(n, d)


def save_imperfect(dataset, path):
    n, d = dataset.y.shape
    bits = np.packbits(dataset.mask.reshape(-1), bitorder="little").tobytes()
    nu = np.asarray(dataset.nu, dtype=np.float64)
    kind = {0: 0, 1: 1, 2: 2}[nu.ndim]
    with open(path, "wb") as fh:
        fh.write(IMPERFECT_MAGIC + struct.pack("<IQI", VERSION, n, d) + _floats(dataset.y))
        fh.write(struct.pack("<Q", len(bits)) + bits)
        fh.write(struct.pack("<B", kind) + _floats(nu.reshape(-1)))


def load_imperfect(path):
    r = _open(path, IMPERFECT_MAGIC)
    n, d = r.unpack("<QI")
    y = r.floats(n * d).reshape(n, d)
    (nbytes,) = r.unpack("<Q")
    bits = np.frombuffer(r.raw(nbytes), dtype=np.uint8)
    mask = np.unpackbits(bits, count=n * d, bitorder="little").astype(bool).reshape(n, d)
    (kind,) = r.unpack("<B")
    if kind == 0:
        nu = float(r.floats(1)[0])
    elif kind == 1:
        nu = r.floats(d)
    elif kind == 2:
        nu = r.floats(n * d).reshape(n, d)
    else:
        raise IngestionError(f"{path}: unknown noise record kind {kind}")
    return ImperfectDataset(y, mask, nu)


class ChainCache:
    """On-disk store of posterior chains keyed by ``(repeat, sample)``.

    One file per repeat; the ``(n, L + 1, d)`` float block is memory-mapped so
    single chains can be read without loading the rest.
    """

    HEADER = struct.calcsize("<IQII")

    def __init__(self, directory):
        self.directory = directory
        os.makedirs(directory, exist_ok=True)

    def path(self, repeat):
        return os.path.join(self.directory, f"chains_{repeat:03d}.bin")

    def save(self, repeat, chains):
        n, steps, d = chains.shape
        with open(self.path(repeat), "wb") as fh:
            fh.write(CHAIN_MAGIC + struct.pack("<IQII", VERSION, n, steps, d) + _floats(chains))

    def _header(self, repeat):
        with open(self.path(repeat), "rb") as fh:
            head = fh.read(8 + self.HEADER)
        if head[:8] != CHAIN_MAGIC:
            raise IngestionError(f"{self.path(repeat)}: not a chain cache file")
        return struct.unpack("<IQII", head[8:])[1:]

    def load(self, repeat, sample):
        n, steps, d = self._header(repeat)
        if not 0 <= sample < n:
            raise IndexError(f"sample {sample} not in cache of {n} chains")
        mm = np.memmap(self.path(repeat), dtype=F64, mode="r", offset=8 + self.HEADER, shape=(n, steps, d))
        return np.array(mm[sample])

    def load_all(self, repeat):
        n, steps, d = self._header(repeat)
        mm = np.memmap(self.path(repeat), dtype=F64, mode="r", offset=8 + self.HEADER, shape=(n, steps, d))
        return np.array(mm)
