"""Tap file reading and writing.

Plain text: one tap per line, ``#`` starts a comment, blank lines are
ignored. JSON: ``{"taps": [...], "kind": "fir" | "linear_phase"}``.
Written taps use 17 significant digits so doubles round-trip exactly.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .signal_core import FirFilter, LinearPhasePrototype, as_taps

__all__ = [
    "TapFileError",
    "read_taps",
    "load_fir",
    "load_prototype",
    "write_taps",
    "format_float",
    "fixture_path",
    "load_fixture",
    "rand10_seed42",
]

KINDS = ("fir", "linear_phase")


class TapFileError(ValueError):
    pass


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def read_taps(path):
    """Return ``(taps, kind)``; ``kind`` is None for plain text files."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TapFileError(f"cannot read {path}: {exc}") from None
    if text.lstrip().startswith("{"):
        try:
            obj = json.loads(text)
            taps = np.asarray(obj["taps"], dtype=float)
        except (ValueError, KeyError, TypeError) as exc:
            raise TapFileError(f"{path}: malformed JSON tap file ({exc})") from None
        kind = obj.get("kind")
        if kind is not None and kind not in KINDS:
            raise TapFileError(f"{path}: unknown kind {kind!r}")
    else:
        vals = []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals.append(float(line))
            except ValueError:
                raise TapFileError(f"{path}:{lineno}: not a number: {line!r}") from None
        taps, kind = np.array(vals), None
    if taps.ndim != 1 or taps.size == 0:
        raise TapFileError(f"{path}: no taps")
    if not np.all(np.isfinite(taps)):
        raise TapFileError(f"{path}: non-finite tap")
    return taps, kind


def load_fir(path) -> FirFilter:
    taps, _ = read_taps(path)
    return FirFilter(taps)


def load_prototype(path) -> LinearPhasePrototype:
    taps, kind = read_taps(path)
    if kind == "fir":
        raise TapFileError(f"{path}: file is marked as a plain FIR")
    try:
        return LinearPhasePrototype(taps)
    except ValueError as exc:
        raise TapFileError(f"{path}: {exc}") from None


def write_taps(path, taps, kind: str | None = None):
    """Write text (default) or, for a ``.json`` suffix, the JSON form."""
    path = Path(path)
    taps = as_taps(taps)
    if path.suffix == ".json":
        obj = {"taps": [float(x) for x in taps]}
        if kind:
            obj["kind"] = kind
        path.write_text(json.dumps(obj, indent=1) + "\n")
    else:
        path.write_text("".join(format_float(x) + "\n" for x in taps))
    return path


def fixture_path(name: str) -> Path:
    """Path of a bundled fixture such as ``"table2_g.txt"``."""
    return Path(str(resources.files("minphase") / "data" / name))


def load_fixture(name: str) -> np.ndarray:
    return read_taps(fixture_path(name))[0]


def rand10_seed42(rng_seed: int = 42, length: int = 10, margin: float = 1e-3) -> np.ndarray:
    """Seeded stand-in for a random arbitrary-phase FIR.

    Taps are uniform on [-1, 1]; a draw is rejected when any zero lies
    within ``margin`` of the unit circle or the leading tap vanishes.
    """
    from .signal_core import zeros

    rng = np.random.default_rng(rng_seed)
    while True:
        h = rng.uniform(-1.0, 1.0, length)
        if h[0] == 0:
            continue
        if np.all(np.abs(np.abs(zeros(h)) - 1.0) > margin):
            return h
