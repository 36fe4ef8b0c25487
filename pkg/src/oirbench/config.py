"""Run configuration: one YAML (or JSON) file checked against a shipped schema."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from .federated import FederatedConfig
from .ledger import LedgerConfig
from .presets import PRESETS
from .sim import MS, SECOND
from .workload import InvalidSpec, SpatialTemplate, WorkloadSpec

SEED_ENV = "OIRBENCH_SEED"


class ConfigInvalid(ValueError):
    pass


def load_schema() -> dict:
    return json.loads(resources.files("oirbench").joinpath("data/config.schema.json").read_text())


@dataclass(frozen=True)
class BackendSpec:
    kind: str
    label: str
    config: FederatedConfig | LedgerConfig | None = None
    url: str | None = None
    remote: dict = field(default_factory=dict)
    inject_delays: bool = False

    def describe(self) -> dict:
        d = {"kind": self.kind, "label": self.label}
        if self.config is not None:
            d["config"] = self.config.to_dict()
            d["inject_delays"] = self.inject_delays
        if self.url is not None:
            d["url"] = self.url
            d["config"] = dict(self.remote)
        return d


@dataclass(frozen=True)
class RunConfig:
    backends: list[BackendSpec]
    workload: WorkloadSpec
    sizes: list[int]
    rates: list[float]
    rounds: int = 10
    mode: str = "virtual"
    seed: int = 0
    output_dir: Path = Path(".")
    csv_name: str = "report.csv"
    json_name: str = "report.json"
    serve_host: str = "127.0.0.1"
    serve_port: int = 8080

    @property
    def csv_path(self) -> Path:
        return self.output_dir / self.csv_name

    @property
    def json_path(self) -> Path:
        return self.output_dir / self.json_name

    def describe(self) -> dict:
        """The resolved configuration echoed into reports (no paths)."""
        w = self.workload.to_dict()
        w.pop("seed")
        w.update(n_tx=list(self.sizes), rate_tps=list(self.rates))
        return {
            "backends": [b.describe() for b in self.backends],
            "workload": w,
            "rounds": self.rounds,
            "mode": self.mode,
        }


def _backend_config(kind: str, preset: str, overrides: dict | None):
    base = PRESETS[kind][preset]
    if not overrides:
        return base
    cls = FederatedConfig if kind == "federated" else LedgerConfig
    return cls.from_dict({**base.to_dict(), **overrides})


def _as_list(x) -> list:
    return list(x) if isinstance(x, list) else [x]


def parse_config(
    doc,
    *,
    seed: int | None = None,
    mode: str | None = None,
    out_dir: str | os.PathLike | None = None,
    env=None,
) -> RunConfig:
    """Validate a loaded document and resolve it.

    Seed precedence: `seed` argument, then the OIRBENCH_SEED environment
    variable, then the file.
    """
    env = os.environ if env is None else env
    try:
        jsonschema.Draft202012Validator(load_schema()).validate(doc)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigInvalid(f"{where}: {e.message}") from None

    if seed is None and env.get(SEED_ENV, "").strip():
        try:
            seed = int(env[SEED_ENV])
        except ValueError:
            raise ConfigInvalid(f"{SEED_ENV} must be an integer, got {env[SEED_ENV]!r}") from None
    seed = doc.get("seed", 0) if seed is None else seed
    if seed < 0:
        raise ConfigInvalid("seed must be >= 0")
    mode = mode or doc.get("mode", "virtual")
    if mode not in ("virtual", "wall"):
        raise ConfigInvalid(f"unknown mode {mode!r}")

    backends = []
    for b in _as_list(doc["backend"]):
        kind = b["kind"]
        label = b.get("label", kind)
        if kind == "remote":
            if mode != "wall":
                raise ConfigInvalid("a remote backend requires wall mode")
            backends.append(BackendSpec(kind, label, url=b["url"], remote=dict(b.get("config", {}))))
            continue
        try:
            cfg = _backend_config(kind, b.get("preset", "default"), b.get("config"))
        except (ValueError, KeyError) as e:
            raise ConfigInvalid(f"backend {label}: {e}") from None
        backends.append(BackendSpec(kind, label, cfg, inject_delays=b.get("inject_delays", False)))
    labels = [b.label for b in backends]
    if len(set(labels)) != len(labels):
        raise ConfigInvalid(f"backend labels must be unique, got {labels}")

    w = dict(doc["workload"])
    sizes = _as_list(w.pop("n_tx"))
    rates = _as_list(w.pop("rate_tps"))
    if "spatial_template" in w:
        w["spatial_template"] = SpatialTemplate(**w["spatial_template"])
    try:
        base = WorkloadSpec(n_tx=sizes[0], rate_tps=rates[0], **w)
        for n in sizes:
            for r in rates:
                replace(base, n_tx=n, rate_tps=r).validate()
    except (InvalidSpec, TypeError) as e:
        raise ConfigInvalid(f"workload: {e}") from None
    st = base.spatial_template
    if not st.alt_lo_m < st.alt_hi_m:
        raise ConfigInvalid("workload/spatial_template: alt_lo_m must be below alt_hi_m")

    out = doc.get("output", {})
    output_dir = Path(out_dir) if out_dir is not None else Path(out.get("dir", "."))
    serve = doc.get("serve", {})
    return RunConfig(
        backends=backends,
        workload=base,
        sizes=sizes,
        rates=rates,
        rounds=doc.get("rounds", 10),
        mode=mode,
        seed=seed,
        output_dir=output_dir,
        csv_name=out.get("csv", "report.csv"),
        json_name=out.get("json", "report.json"),
        serve_host=serve.get("host", "127.0.0.1"),
        serve_port=serve.get("port", 8080),
    )


def load_config(path, **overrides) -> RunConfig:
    """Read and resolve a config file. Relative output dirs are taken
    relative to the current directory."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise ConfigInvalid(f"cannot read {p}: {e}") from None
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigInvalid(f"{p}: not valid YAML: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigInvalid(f"{p}: top level must be a mapping")
    return parse_config(doc, **overrides)


def remote_deadline(spec: BackendSpec) -> int:
    return round(spec.remote.get("request_deadline_ms", 30 * SECOND / MS) * MS)
