"""Dataset manifests over the images/ + masks/ directory layout."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from ..core_types import BinaryMask, ImageRgb8, load_image, load_mask


@dataclass(frozen=True)
class SampleEntry:
    id: str
    image_path: Path
    mask_path: Path | None = None


@dataclass(frozen=True)
class DatasetManifest:
    root: Path
    samples: tuple[SampleEntry, ...]

    def __post_init__(self) -> None:
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate sample ids in manifest")
        for s in self.samples:
            if not s.image_path.is_file():
                raise FileNotFoundError(s.image_path)
            if s.mask_path is not None and not s.mask_path.is_file():
                raise FileNotFoundError(s.mask_path)

    def load_images(self) -> list[tuple[str, ImageRgb8]]:
        return [(s.id, load_image(s.image_path)) for s in self.samples]

    def load_masks(self) -> dict[str, BinaryMask]:
        return {
            s.id: load_mask(s.mask_path) for s in self.samples if s.mask_path is not None
        }


def load_manifest(root: str | Path) -> DatasetManifest:
    """Scan root/images/*.png (sorted by id) with optional root/masks/<id>.png."""
    root = Path(root)
    image_dir = root / "images"
    if not image_dir.is_dir():
        raise FileNotFoundError(f"no images/ directory under {root}")
    mask_dir = root / "masks"
    entries = []
    for image_path in sorted(image_dir.glob("*.png")):
        sample_id = image_path.stem
        mask_path = mask_dir / f"{sample_id}.png"
        entries.append(
            SampleEntry(
                id=sample_id,
                image_path=image_path,
                mask_path=mask_path if mask_path.is_file() else None,
            )
        )
    if not entries:
        raise FileNotFoundError(f"no PNG images under {image_dir}")
    return DatasetManifest(root=root, samples=tuple(entries))
