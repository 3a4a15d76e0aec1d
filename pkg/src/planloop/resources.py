"""Access to the data files bundled with the package."""

from __future__ import annotations

from pathlib import Path


def data_dir() -> Path:
    return Path(__file__).resolve().parent / "data"


def data_path(*parts: str) -> Path:
    p = data_dir().joinpath(*parts)
    if not p.exists():
        raise FileNotFoundError(f"no bundled data file {'/'.join(parts)}")
    return p
