"""Campaign configuration files and the built-in Table 1 presets.

Config files are YAML::

    version: 1
    output_dir: runs
    report:
      plateau_tol: 1.0e-3
      formats: [csv, svg]
    defaults:            # merged into every experiment
      cycles: 50
    experiments:
      - preset: c4-bell  # start from a built-in preset ...
        cycles: 80       # ... and override fields
      - name: my-run     # or spell out a full experiment
        input: plus:3
        target: cluster:3
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import yaml

from .experiment import ExperimentSpec

CONFIG_VERSION = 1
BUNDLED_CONFIG = "table1.yaml"

# Best success probabilities quoted for optimal linear-optical schemes.
PUBLISHED_OPTIMUM: dict[str, Fraction] = {
    "c2-bell": Fraction(1),
    "c4-bell": Fraction(1, 4),
    "c6-bell": Fraction(1, 16),
    "c8-bell": Fraction(1, 64),
    **{f"c{n}-product": Fraction(1, 2 ** (n - 1)) for n in range(2, 9)},
}

# Fusion with the 1/9 destructive CZ gate, for comparison.
CZ_FUSION: dict[str, Fraction] = {
    **{f"c{n}-product": Fraction(1, 9 ** (n - 1)) for n in range(2, 9)},
    **{f"c{n}-bell": Fraction(1, 9 ** (n // 2 - 1)) for n in (4, 6, 8)},
}


class ConfigError(ValueError):
    pass


def preset(name: str) -> dict[str, Any]:
    """Experiment fields for a Table 1 cell such as ``c4-bell`` or ``c5-product``."""
    try:
        size, kind = name.lower().split("-")
        n = int(size.lstrip("c"))
    except ValueError:
        raise ConfigError(f"unknown preset {name!r}; expected c<n>-bell or c<n>-product") from None
    if not 2 <= n <= 8 or kind not in ("bell", "product") or not size.startswith("c"):
        raise ConfigError(f"unknown preset {name!r}; expected c2..c8 with -bell or -product")
    if kind == "bell":
        if n % 2:
            raise ConfigError(f"{name}: odd clusters from Bell pairs are n/a in Table 1")
        return {"name": name.lower(), "input": f"bell:{n // 2}", "target": f"cluster:{n}"}
    return {"name": name.lower(), "input": f"plus:{n}", "target": f"cluster:{n}"}


PRESETS = [f"c{n}-product" for n in range(2, 9)] + [f"c{n}-bell" for n in (2, 4, 6, 8)]


@dataclass
class CampaignConfig:
    experiments: dict[str, ExperimentSpec]
    output_dir: Path = Path("runs")
    plateau_tol: float = 1e-3
    formats: tuple[str, ...] = ("csv", "svg")
    source: str = "<built-in>"
    notes: dict[str, Any] = field(default_factory=dict)

    def get(self, name: str) -> ExperimentSpec:
        try:
            return self.experiments[name]
        except KeyError:
            available = ", ".join(sorted(self.experiments))
            raise ConfigError(
                f"no experiment {name!r} in {self.source}; available: {available}"
            ) from None


def parse_config(data: Mapping[str, Any], source: str = "<memory>") -> CampaignConfig:
    if not isinstance(data, Mapping):
        raise ConfigError(f"{source}: top level must be a mapping")
    version = data.get("version")
    if version != CONFIG_VERSION:
        raise ConfigError(f"{source}: unsupported config version {version!r} (want {CONFIG_VERSION})")
    defaults = dict(data.get("defaults") or {})
    entries = data.get("experiments")
    if not entries:
        raise ConfigError(f"{source}: no experiments listed")
    experiments: dict[str, ExperimentSpec] = {}
    for i, entry in enumerate(entries):
        entry = dict(entry)
        fields = dict(defaults)
        if "preset" in entry:
            fields.update(preset(entry.pop("preset")))
        fields.update(entry)
        try:
            spec = ExperimentSpec.from_dict(fields)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{source}: experiment #{i}: {exc}") from None
        if spec.name in experiments:
            raise ConfigError(f"{source}: duplicate experiment name {spec.name!r}")
        experiments[spec.name] = spec
    report = dict(data.get("report") or {})
    return CampaignConfig(
        experiments=experiments,
        output_dir=Path(data.get("output_dir", "runs")),
        plateau_tol=float(report.get("plateau_tol", 1e-3)),
        formats=tuple(report.get("formats", ("csv", "svg"))),
        source=source,
    )


def load_config(path: str | Path | None = None) -> CampaignConfig:
    """Parse a YAML campaign file; ``None`` loads the bundled Table 1 campaign."""
    if path is None:
        text = resources.files("clusterforge").joinpath(BUNDLED_CONFIG).read_text()
        return parse_config(yaml.safe_load(text), BUNDLED_CONFIG)
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    return parse_config(data, str(path))
