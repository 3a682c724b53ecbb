"""JSON containers for fitted projections and their preprocessing."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import write_text_atomic
from .errors import ValidationError
from .kernels import KernelSpec
from .solver import KernelProjection, LinearProjection

FORMAT = "ssrlpl.projection"
VERSION = 1


@dataclass(frozen=True)
class Preprocessing:
    """Feature transform applied before fitting; replayed on new data."""

    scale: float = 1.0
    mean: np.ndarray | None = None
    std: np.ndarray | None = None

    def apply(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.mean is not None:
            X = (X - self.mean[:, None]) / self.std[:, None]
        return X * self.scale

    def to_dict(self) -> dict:
        return {
            "scale": self.scale,
            "standardize": None if self.mean is None else {"mean": self.mean.tolist(), "std": self.std.tolist()},
        }

    @classmethod
    def from_dict(cls, data: dict | None) -> "Preprocessing":
        if not data:
            return cls()
        std = data.get("standardize")
        if std is None:
            return cls(scale=float(data["scale"]))
        return cls(float(data["scale"]), np.array(std["mean"], float), np.array(std["std"], float))


def _rows(a: np.ndarray) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def projection_to_dict(proj, preprocessing: Preprocessing | None = None, provenance: dict | None = None) -> dict:
    out = {"format": FORMAT, "version": VERSION}
    if isinstance(proj, LinearProjection):
        out.update(
            kind="linear",
            shape={"d": proj.d, "p": proj.p, "n_train": proj.n_train},
            kernel=None,
            ridge=None,
            eigenvalues=_rows(proj.eigenvalues),
            V=_rows(proj.V),
        )
    elif isinstance(proj, KernelProjection):
        d = None if proj.train_data is None else int(proj.train_data.shape[0])
        out.update(
            kind="kernel",
            shape={"d": d, "p": proj.p, "n_train": proj.n_train},
            kernel=proj.spec.to_dict(),
            ridge=proj.ridge,
            eigenvalues=_rows(proj.eigenvalues),
            beta=_rows(proj.beta),
            train_data=None if proj.train_data is None else _rows(proj.train_data),
        )
    else:
        raise TypeError(f"not a projection: {type(proj).__name__}")
    out["preprocessing"] = (preprocessing or Preprocessing()).to_dict()
    if provenance is not None:
        out["provenance"] = provenance
    return out


def projection_from_dict(data: dict):
    """Inverse of ``projection_to_dict``; returns ``(projection, preprocessing)``."""
    if data.get("format") != FORMAT:
        raise ValidationError("not a projection file")
    if data.get("version") != VERSION:
        raise ValidationError(f"unsupported projection version {data.get('version')}")
    shape = data["shape"]
    eigenvalues = np.array(data["eigenvalues"], dtype=np.float64)
    if data["kind"] == "linear":
        V = np.array(data["V"], dtype=np.float64).reshape(shape["d"], shape["p"])
        proj = LinearProjection(V=V, eigenvalues=eigenvalues, n_train=shape["n_train"])
    elif data["kind"] == "kernel":
        beta = np.array(data["beta"], dtype=np.float64).reshape(shape["n_train"], shape["p"])
        train = data.get("train_data")
        train = None if train is None else np.array(train, dtype=np.float64).reshape(shape["d"], shape["n_train"])
        proj = KernelProjection(
            beta=beta,
            train_data=train,
            spec=KernelSpec(**data["kernel"]),
            eigenvalues=eigenvalues,
            ridge=float(data["ridge"]),
        )
    else:
        raise ValidationError(f"unknown projection kind {data['kind']!r}")
    return proj, Preprocessing.from_dict(data.get("preprocessing"))


def dumps(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def save_projection(path, proj, preprocessing=None, provenance=None) -> None:
    write_text_atomic(path, dumps(projection_to_dict(proj, preprocessing, provenance)))


def load_projection(path):
    with Path(path).open(encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    return projection_from_dict(data)
