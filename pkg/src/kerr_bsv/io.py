"""Strict JSON scenario configs, CSV writers and run manifests."""

from __future__ import annotations

import dataclasses
import hashlib
import json
import typing
from pathlib import Path

import numpy as np


class ConfigError(ValueError):
    pass


def _coerce(name, value, tp):
    origin = typing.get_origin(tp)
    args = typing.get_args(tp)
    if origin is typing.Union or (origin is not None and type(None) in args):
        if value is None and type(None) in args:
            return None
        inner = [a for a in args if a is not type(None)]
        return _coerce(name, value, inner[0])
    if origin is list:
        if not isinstance(value, list):
            raise ConfigError(f"{name}: expected a list")
        return [_coerce(f"{name}[{i}]", v, args[0]) for i, v in enumerate(value)]
    if tp is dict:
        if not isinstance(value, dict):
            raise ConfigError(f"{name}: expected an object")
        return dict(value)
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(f"{name}: expected true/false")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name}: expected an integer")
        return value
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name}: expected a number")
        return float(value)
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(f"{name}: expected a string")
        return value
    raise ConfigError(f"{name}: unsupported field type {tp}")


def config_from_dict(cls, data: dict):
    """Build dataclass ``cls`` from ``data``; unknown and missing keys are errors."""
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    hints = typing.get_type_hints(cls)
    fields = {f.name: f for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - set(fields))
    if unknown:
        raise ConfigError(f"unknown config keys for {cls.__name__}: {', '.join(unknown)}")
    kwargs = {}
    for name, f in fields.items():
        if name in data:
            kwargs[name] = _coerce(name, data[name], hints[name])
        elif f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
            raise ConfigError(f"missing required config key '{name}' for {cls.__name__}")
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(cls, path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(cls, json.load(fh))


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: str | Path, header: list[str], rows) -> Path:
    """Comma-separated UTF-8 with a header row and 17 significant digits."""
    path = Path(path)
    lines = [",".join(header)]
    for row in rows:
        if len(row) != len(header):
            raise ValueError("row length does not match header")
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_csv(path: str | Path) -> tuple[list[str], np.ndarray]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_matrix_csv(path: str | Path, matrix: np.ndarray, labels: np.ndarray) -> Path:
    """Square matrix with the axis labels as first row and first column."""
    header = ["label"] + [_fmt(v) for v in labels]
    rows = [[labels[i], *matrix[i]] for i in range(matrix.shape[0])]
    return write_csv(path, header, rows)


def sha256(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj):
    if dataclasses.is_dataclass(obj):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path: str | Path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_manifest(outdir: Path, scenario: str, config, seed: int | None, outputs: list[Path], extra=None) -> Path:
    """Everything needed to reproduce a run: config, seed, versions, output hashes."""
    import scipy

    from . import __version__

    manifest = {
        "scenario": scenario,
        "config": config,
        "seed": seed,
        "versions": {"kerr_bsv": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": {Path(p).name: sha256(p) for p in sorted(outputs)},
    }
    if extra:
        manifest["results"] = extra
    return write_json(Path(outdir) / "manifest.json", manifest)
