"""Dataset manifest: ordered temporal samples per scene, one image per camera."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path


@dataclass
class Sample:
    timestamp: int
    images: dict[str, str]
    lidar_path: str | None = None

    def to_dict(self) -> dict:
        d = {"timestamp": self.timestamp, "images": dict(self.images)}
        if self.lidar_path is not None:
            d["lidar"] = self.lidar_path
        return d


@dataclass
class Scene:
    scene_id: str
    samples: list[Sample] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"scene_id": self.scene_id, "samples": [s.to_dict() for s in self.samples]}


@dataclass
class Manifest:
    cameras: list[str]
    scenes: list[Scene] = field(default_factory=list)

    def validate(self) -> "Manifest":
        if len(set(self.cameras)) != len(self.cameras):
            raise ValueError("camera names must be unique")
        seen = set()
        cams = set(self.cameras)
        for scene in self.scenes:
            if scene.scene_id in seen:
                raise ValueError(f"duplicate scene_id {scene.scene_id!r}")
            seen.add(scene.scene_id)
            last_ts = None
            for i, sample in enumerate(scene.samples):
                if last_ts is not None and sample.timestamp < last_ts:
                    raise ValueError(
                        f"scene {scene.scene_id!r}: samples not ordered by timestamp at index {i}"
                    )
                last_ts = sample.timestamp
                if set(sample.images) != cams:
                    raise ValueError(
                        f"scene {scene.scene_id!r} sample {i}: image cameras "
                        f"{sorted(sample.images)} != rig cameras {sorted(cams)}"
                    )
        return self

    def to_dict(self) -> dict:
        return {"cameras": list(self.cameras), "scenes": [s.to_dict() for s in self.scenes]}

    @classmethod
    def from_dict(cls, data: dict) -> "Manifest":
        scenes = [
            Scene(
                scene_id=s["scene_id"],
                samples=[
                    Sample(
                        timestamp=int(smp["timestamp"]),
                        images=dict(smp["images"]),
                        lidar_path=smp.get("lidar"),
                    )
                    for smp in s.get("samples", [])
                ],
            )
            for s in data.get("scenes", [])
        ]
        return cls(cameras=list(data["cameras"]), scenes=scenes).validate()

    @classmethod
    def load(cls, path) -> "Manifest":
        """Read a manifest file; relative image paths resolve against its directory."""
        path = Path(path)
        m = cls.from_dict(json.loads(path.read_text()))
        base = path.parent
        for scene in m.scenes:
            for sample in scene.samples:
                sample.images = {
                    cam: str((base / p).resolve()) if not Path(p).is_absolute() else p
                    for cam, p in sample.images.items()
                }
                if sample.lidar_path is not None and not Path(sample.lidar_path).is_absolute():
                    sample.lidar_path = str((base / sample.lidar_path).resolve())
        return m

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    def image_count(self) -> int:
        return sum(len(s.samples) for s in self.scenes) * len(self.cameras)
