"""Toolkit configuration: one JSON document, validated on load.

Unknown keys are rejected so typos fail loudly. The --config CLI flag wins;
the STW_CONFIG environment variable is the fallback; otherwise defaults apply.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field

from .augmentation import AugmentConfig
from .descriptors import FeatureConfig
from .segmentation import SegmentationBounds

CONFIG_ENV_VAR = "STW_CONFIG"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServerConfig:
    port: int = 8000
    manifest: str | None = None
    label_sink: str = "labels.jsonl"
    ui_dir: str | None = None
    exemplar_dir: str | None = None
    stratified: int | None = None  # N individuals per class, as in the validation pass
    seed: int = 0
    guidance: str = ""


@dataclass(frozen=True)
class ToolkitConfig:
    desc: FeatureConfig = field(default_factory=FeatureConfig)
    seg: SegmentationBounds = field(default_factory=SegmentationBounds)
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    palette: str | None = None  # None = packaged MST palette
    data_root: str | None = None

    def to_dict(self):
        return {
            "desc": {"bins": self.desc.bins, "tau": self.desc.tau,
                     "tau_percent": self.desc.tau_percent,
                     "normalize": self.desc.normalize},
            "seg": {"cb_min": self.seg.cb_min, "cb_max": self.seg.cb_max,
                    "cr_min": self.seg.cr_min, "cr_max": self.seg.cr_max},
            "augment": self.augment.to_dict(),
            "server": {"port": self.server.port, "manifest": self.server.manifest,
                       "label_sink": self.server.label_sink,
                       "ui_dir": self.server.ui_dir,
                       "exemplar_dir": self.server.exemplar_dir,
                       "stratified": self.server.stratified,
                       "seed": self.server.seed,
                       "guidance": self.server.guidance},
            "palette": self.palette,
            "data_root": self.data_root,
        }


def _build(section, cls, obj):
    allowed = set(cls.__dataclass_fields__)
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {section!r}: {sorted(unknown)}")
    try:
        return cls(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {section!r} section: {exc}") from exc


def config_from_dict(obj):
    allowed = {"desc", "seg", "augment", "server", "palette", "data_root"}
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"unknown top-level config key(s): {sorted(unknown)}")
    return ToolkitConfig(
        desc=_build("desc", FeatureConfig, obj.get("desc", {})),
        seg=_build("seg", SegmentationBounds, obj.get("seg", {})),
        augment=AugmentConfig.from_dict(obj["augment"]) if "augment" in obj
        else AugmentConfig(),
        server=_build("server", ServerConfig, obj.get("server", {})),
        palette=obj.get("palette"),
        data_root=obj.get("data_root"),
    )


def load_config(path=None):
    """Load the toolkit config from path, $STW_CONFIG, or defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return ToolkitConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return config_from_dict(obj)


def config_hash(config):
    """Stable hash of the full configuration, for reproducibility records."""
    payload = json.dumps(config.to_dict(), sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
