from __future__ import annotations

import argparse
import logging
import os
from dataclasses import dataclass
from pathlib import Path

from dotenv import load_dotenv

from src.algebra.groups import DEFAULT_GROUP_CAP
from src.algebra.lattices import PRESET_DIR
from src.core.errors import InputError

load_dotenv()

FORMATS = ("table", "json", "csv")


@dataclass(frozen=True)
class Settings:
    preset_dir: Path = PRESET_DIR
    group_cap: int = DEFAULT_GROUP_CAP
    log_level: str = "INFO"


def load_settings() -> Settings:
    preset_dir = Path(os.getenv("QCOHOM_PRESET_DIR", "") or PRESET_DIR)
    raw_cap = os.getenv("QCOHOM_GROUP_CAP", "").strip()
    try:
        cap = int(raw_cap) if raw_cap else DEFAULT_GROUP_CAP
    except ValueError:
        raise RuntimeError(f"QCOHOM_GROUP_CAP must be an integer, got {raw_cap!r}") from None
    if cap < 1:
        raise RuntimeError("QCOHOM_GROUP_CAP must be positive")
    level = os.getenv("QCOHOM_LOG_LEVEL", "INFO").strip().upper() or "INFO"
    if level not in logging.getLevelNamesMapping():
        raise RuntimeError(f"QCOHOM_LOG_LEVEL {level!r} is not a logging level")
    return Settings(preset_dir=preset_dir, group_cap=cap, log_level=level)


@dataclass(frozen=True)
class JobConfig:
    command: str
    presets: tuple[str, ...] = ()
    all_presets: bool = False
    group_path: Path | None = None
    lattice_path: Path | None = None
    class_index: int | None = None
    kmax: int = 2
    seed: int = 0
    format: str = "table"
    out: Path | None = None
    modulus_override: int | None = None
    two_d: bool = False
    flip_pairing_sign: bool = False

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> JobConfig:
        group_path = getattr(ns, "group", None)
        lattice_path = getattr(ns, "lattice", None)
        if (group_path is None) != (lattice_path is None):
            raise InputError("--group and --lattice must be given together")
        for path in (group_path, lattice_path):
            if path is not None and not Path(path).is_file():
                raise InputError(f"{path}: no such file")
        kmax = getattr(ns, "kmax", 2)
        if kmax < 0:
            raise InputError("--kmax must be non-negative")
        modulus = getattr(ns, "modulus_override", None)
        if modulus is not None and modulus < 1:
            raise InputError("--modulus-override must be positive")
        fmt = getattr(ns, "format", "table")
        if fmt not in FORMATS:
            raise InputError(f"unknown format {fmt!r}")
        return cls(
            command=ns.command,
            presets=tuple(getattr(ns, "preset", None) or ()),
            all_presets=bool(getattr(ns, "all", False)),
            group_path=Path(group_path) if group_path else None,
            lattice_path=Path(lattice_path) if lattice_path else None,
            class_index=getattr(ns, "class_index", None),
            kmax=kmax,
            seed=getattr(ns, "seed", 0),
            format=fmt,
            out=Path(ns.out) if getattr(ns, "out", None) else None,
            modulus_override=modulus,
            two_d=bool(getattr(ns, "two_d", False)),
            flip_pairing_sign=bool(getattr(ns, "flip_pairing_sign", False)),
        )
