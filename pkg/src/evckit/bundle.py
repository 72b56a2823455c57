"""The on-disk prosody bundle (versioned JSON) and the contour CSV format."""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParameterError, SchemaError
from .units import DedupResult

BUNDLE_SCHEMA = 1


@dataclass
class ProsodyBundle:
    """Raw and smoothed F0/energy contours with the VUV mask for one utterance.

    Augmented contours and unit durations are optional; `meta` carries
    sample_rate, hop, the source file name, and any seeds used.
    """

    f0: np.ndarray
    f0_smooth: np.ndarray
    energy: np.ndarray
    energy_smooth: np.ndarray
    vuv: np.ndarray
    f0_aug: np.ndarray | None = None
    energy_aug: np.ndarray | None = None
    durations: DedupResult | None = None
    durations_smooth: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("f0", "f0_smooth", "energy", "energy_smooth"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        self.vuv = np.asarray(self.vuv).astype(np.uint8)
        n = self.f0.size
        for name in ("f0_smooth", "energy", "energy_smooth", "vuv"):
            if getattr(self, name).size != n:
                raise ParameterError(f"{name} length does not match f0 length {n}")
        for name in ("f0_aug", "energy_aug"):
            value = getattr(self, name)
            if value is not None:
                value = np.asarray(value, dtype=np.float64)
                if value.size != n:
                    raise ParameterError(f"{name} length does not match f0 length {n}")
                setattr(self, name, value)
        if self.durations_smooth is not None:
            self.durations_smooth = np.asarray(self.durations_smooth, dtype=np.float64)
            if self.durations is None or self.durations_smooth.size != len(self.durations):
                raise ParameterError("durations_smooth requires matching durations")

    @property
    def n_frames(self) -> int:
        return self.f0.size


def bundle_to_dict(bundle: ProsodyBundle) -> dict:
    payload = {
        "schema": BUNDLE_SCHEMA,
        "meta": bundle.meta,
        "f0": bundle.f0.tolist(),
        "f0_smooth": bundle.f0_smooth.tolist(),
        "energy": bundle.energy.tolist(),
        "energy_smooth": bundle.energy_smooth.tolist(),
        "vuv": bundle.vuv.astype(int).tolist(),
    }
    if bundle.f0_aug is not None:
        payload["f0_aug"] = bundle.f0_aug.tolist()
    if bundle.energy_aug is not None:
        payload["energy_aug"] = bundle.energy_aug.tolist()
    if bundle.durations is not None:
        durations = {
            "units": bundle.durations.unique_units.tolist(),
            "counts": bundle.durations.counts.tolist(),
        }
        if bundle.durations_smooth is not None:
            durations["counts_smooth"] = bundle.durations_smooth.tolist()
        payload["durations"] = durations
    return payload


def bundle_from_dict(payload: dict) -> ProsodyBundle:
    if not isinstance(payload, dict):
        raise SchemaError("bundle must be a JSON object")
    if payload.get("schema") != BUNDLE_SCHEMA:
        raise SchemaError(f"unsupported bundle schema {payload.get('schema')!r}")
    try:
        kwargs = {
            "f0": payload["f0"],
            "f0_smooth": payload["f0_smooth"],
            "energy": payload["energy"],
            "energy_smooth": payload["energy_smooth"],
            "vuv": payload["vuv"],
            "meta": payload.get("meta", {}),
        }
    except KeyError as exc:
        raise SchemaError(f"bundle missing required field {exc}") from exc
    if "f0_aug" in payload:
        kwargs["f0_aug"] = payload["f0_aug"]
    if "energy_aug" in payload:
        kwargs["energy_aug"] = payload["energy_aug"]
    if "durations" in payload:
        durations = payload["durations"]
        try:
            kwargs["durations"] = DedupResult(
                np.asarray(durations["units"]), np.asarray(durations["counts"])
            )
        except (KeyError, TypeError, ParameterError) as exc:
            raise SchemaError(f"malformed durations block: {exc}") from exc
        if "counts_smooth" in durations:
            kwargs["durations_smooth"] = durations["counts_smooth"]
    try:
        return ProsodyBundle(**kwargs)
    except (ParameterError, TypeError, ValueError) as exc:
        raise SchemaError(f"invalid bundle content: {exc}") from exc


def save_bundle(path, bundle: ProsodyBundle) -> None:
    Path(path).write_text(json.dumps(bundle_to_dict(bundle), sort_keys=True, indent=1) + "\n")


def load_bundle(path) -> ProsodyBundle:
    try:
        payload = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    return bundle_from_dict(payload)


def save_contour_csv(path, values) -> None:
    """Write a contour as CSV with a `frame,value` header."""
    values = np.asarray(values, dtype=np.float64)
    lines = ["frame,value"]
    lines += [f"{i},{float(v)!r}" for i, v in enumerate(values)]
    Path(path).write_text("\n".join(lines) + "\n")


def load_contour_csv(path) -> np.ndarray:
    lines = Path(path).read_text().splitlines()
    if not lines or lines[0].strip() != "frame,value":
        raise SchemaError(f"{path}: expected header 'frame,value'")
    values = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            _, value = line.split(",")
            values.append(float(value))
        except ValueError as exc:
            raise SchemaError(f"{path}:{lineno}: malformed row {line!r}") from exc
    return np.asarray(values, dtype=np.float64)
