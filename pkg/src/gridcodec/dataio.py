"""Dataset ingestion, synthetic generation, and persistence.

Three file formats live here: the published Ausgrid half-hourly solar-home
CSV (read only), the package's internal dataset CSV (one profile per row,
plain decimals chosen over binary for diffability), and codec JSON as
defined by the codec classes themselves.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .autoencoder import AutoencoderCodec
from .errors import EmptySelection, ParseError
from .profiles import ProfileDataset
from .transforms import LinearCodec

AUSGRID_INTERVALS = 48
# Leading fields before the interval columns in the Ausgrid layout.
AUSGRID_PREFIX = ("Customer", "Generator Capacity", "Postcode", "Consumption Category", "date")


def load_ausgrid(path, customer_id: str | int | None = None,
                 category: str = "GC") -> ProfileDataset:
    """Read daily length-48 profiles from an Ausgrid solar-home CSV.

    Skips any banner rows before the header line, keeps rows matching the
    requested customer (all customers when None) and consumption category,
    and preserves file order.  Blank interval cells count as 0 kWh.
    """
    path = Path(path)
    wanted_customer = None if customer_id is None else str(customer_id)
    rows: list[np.ndarray] = []
    header_seen = False
    with path.open(newline="") as handle:
        for line_no, row in enumerate(csv.reader(handle), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if not header_seen:
                if row[0].strip().lower() == "customer":
                    header_seen = True
                continue
            if len(row) < 5 + AUSGRID_INTERVALS:
                raise ParseError(f"{path.name}:{line_no}: expected at least "
                                 f"{5 + AUSGRID_INTERVALS} columns, got {len(row)}")
            if wanted_customer is not None and row[0].strip() != wanted_customer:
                continue
            if row[3].strip() != category:
                continue
            try:
                values = [float(cell) if cell.strip() else 0.0
                          for cell in row[5:5 + AUSGRID_INTERVALS]]
            except ValueError as exc:
                raise ParseError(f"{path.name}:{line_no}: {exc}") from exc
            rows.append(np.array(values))
    if not header_seen:
        raise ParseError(f"{path.name}: no header row starting with 'Customer' found")
    if not rows:
        raise EmptySelection(
            f"{path.name}: no rows matched customer={customer_id!r} category={category!r}")
    metadata = {"source": str(path), "category": category}
    if customer_id is not None:
        metadata["customer"] = str(customer_id)
    return ProfileDataset.from_profiles(rows, dim=AUSGRID_INTERVALS, metadata=metadata)


def synth_generate(seed: int, count: int, dim: int, bump_count: int = 3,
                   bump_scale: float = 1.0, noise_scale: float = 0.05) -> ProfileDataset:
    """Nonnegative synthetic profiles: a few sharp Gaussian bumps plus noise.

    Bumps get random centers, widths, and heights (up to ``bump_scale``),
    yielding sparse localized peaks rather than uniformly smooth curves.
    Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    slots = np.arange(dim, dtype=float)
    values = np.zeros((count, dim))
    min_width = 0.5
    max_width = max(1.0, dim / 8.0)
    for i in range(count):
        if bump_count > 0:
            centers = rng.uniform(0.0, dim, size=bump_count)
            widths = rng.uniform(min_width, max_width, size=bump_count)
            heights = rng.uniform(0.0, bump_scale, size=bump_count)
            spread = (slots[None, :] - centers[:, None]) / widths[:, None]
            values[i] = heights @ np.exp(-0.5 * spread ** 2)
        values[i] += rng.uniform(0.0, noise_scale, size=dim)
    metadata = {
        "source": "synthetic",
        "seed": str(seed),
        "bump_count": str(bump_count),
        "bump_scale": repr(float(bump_scale)),
        "noise_scale": repr(float(noise_scale)),
    }
    return ProfileDataset(np.clip(values, 0.0, None), metadata)


def split_dataset(dataset: ProfileDataset,
                  holdout_fraction: float) -> tuple[ProfileDataset, ProfileDataset]:
    """Deterministic contiguous split: leading rows train, trailing rows held out.

    The held-out part gets at least one profile and so does the training
    part; fractions outside (0, 1) are rejected.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise ValueError(f"holdout fraction must be in (0, 1), got {holdout_fraction}")
    held = max(1, round(dataset.count * holdout_fraction))
    if held >= dataset.count:
        raise ValueError(
            f"holdout of {held} rows leaves no training data (dataset has {dataset.count})")
    first = dict(dataset.metadata, split="train")
    second = dict(dataset.metadata, split="holdout")
    return (ProfileDataset(dataset.values[:dataset.count - held], first),
            ProfileDataset(dataset.values[dataset.count - held:], second))


def save_dataset(dataset: ProfileDataset, path) -> None:
    """Write one profile per row as plain decimals (shortest exact repr)."""
    with Path(path).open("w") as handle:
        for row in dataset.values:
            handle.write(",".join(repr(float(v)) for v in row))
            handle.write("\n")


def load_dataset(path) -> ProfileDataset:
    path = Path(path)
    rows = []
    with path.open() as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rows.append(np.array([float(cell) for cell in line.split(",")]))
            except ValueError as exc:
                raise ParseError(f"{path.name}:{line_no}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path.name}: file contains no profiles")
    return ProfileDataset.from_profiles(rows, metadata={"source": str(path)})


def save_codec(codec: LinearCodec | AutoencoderCodec, path) -> None:
    with Path(path).open("w") as handle:
        json.dump(codec.to_json_dict(), handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_codec(path) -> LinearCodec | AutoencoderCodec:
    path = Path(path)
    with path.open() as handle:
        obj = json.load(handle)
    kind = obj.get("kind")
    if kind == "linear":
        return LinearCodec.from_json_dict(obj)
    if kind == "autoencoder":
        return AutoencoderCodec.from_json_dict(obj)
    raise ParseError(f"{path.name}: unknown codec kind {kind!r}")
