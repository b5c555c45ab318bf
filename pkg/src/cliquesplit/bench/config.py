"""
JSON experiment configuration.

A config is a JSON object::

    {
      "kind": "consensus_lasso",            # resource_allocation | spectrum_study | custom
      "graph": {"generator": "erdos_renyi", "n": 50, "p": 0.2, "seed": 1},
      "clique_kind": "maximal",
      "seeds": {"data": 0},
      "solvers": [{"algorithm": "nids", "mixing": "phi_maximal", "iters": 200}],
      "params": {...},
      "output_dir": "out"
    }

Graphs come either from a generator with an explicit seed or from
``{"file": "graph.txt"}`` (resolved relative to the config file).
"""

from __future__ import annotations

import copy
import enum
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..graph import CliqueKind, erdos_renyi, read_graph


class ExperimentKind(str, enum.Enum):
    RESOURCE_ALLOCATION = "resource_allocation"
    CONSENSUS_LASSO = "consensus_lasso"
    SPECTRUM_STUDY = "spectrum_study"
    CUSTOM = "custom"


@dataclass
class ExperimentConfig:
    kind: ExperimentKind
    graph: dict | None = None
    clique_kind: str = "maximal"
    seeds: dict = field(default_factory=dict)
    solvers: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    output_dir: str = "results"
    base_dir: Path = field(default_factory=Path.cwd)

    def to_dict(self):
        return {
            "kind": self.kind.value, "graph": self.graph, "clique_kind": self.clique_kind,
            "seeds": self.seeds, "solvers": self.solvers, "params": self.params,
            "output_dir": self.output_dir,
        }

    def digest(self):
        """SHA-256 of the canonical JSON form (output directory excluded)."""
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()

    def seed(self, name, default=None):
        s = self.seeds.get(name, default)
        if s is None:
            raise ConfigError(f"missing seed {name!r}; seeds must be explicit")
        if not isinstance(s, int) or isinstance(s, bool):
            raise ConfigError(f"seed {name!r} must be an integer")
        return s

    def build_graph(self):
        g = self.graph
        if g is None:
            raise ConfigError("config has no graph")
        if "file" in g:
            path = Path(g["file"])
            if not path.is_absolute():
                path = self.base_dir / path
            if not path.exists():
                raise ConfigError(f"graph file {path} does not exist")
            return read_graph(path)
        if g.get("generator") == "erdos_renyi":
            try:
                n, p, seed = int(g["n"]), float(g["p"]), g["seed"]
            except KeyError as e:
                raise ConfigError(f"erdos_renyi graph needs {e.args[0]!r}") from None
            if not isinstance(seed, int):
                raise ConfigError("graph seed must be an integer")
            return erdos_renyi(n, p, seed, connected=g.get("connected", True))
        raise ConfigError("graph needs 'file' or 'generator'")


def config_from_dict(d, base_dir=None):
    if not isinstance(d, dict):
        raise ConfigError("config must be a JSON object")
    d = copy.deepcopy(d)
    try:
        kind = ExperimentKind(d.pop("kind"))
    except KeyError:
        raise ConfigError("config needs 'kind'") from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    cfg = ExperimentConfig(kind=kind, base_dir=Path(base_dir) if base_dir else Path.cwd())
    for key in ("graph", "clique_kind", "seeds", "solvers", "params", "output_dir"):
        if key in d:
            setattr(cfg, key, d.pop(key))
    if d:
        raise ConfigError(f"unknown config keys: {sorted(d)}")
    if cfg.clique_kind not in {k.value for k in CliqueKind}:
        raise ConfigError(f"unknown clique kind {cfg.clique_kind!r}")
    if not isinstance(cfg.seeds, dict) or not isinstance(cfg.params, dict):
        raise ConfigError("'seeds' and 'params' must be objects")
    if not isinstance(cfg.solvers, list) or not all(isinstance(s, dict) for s in cfg.solvers):
        raise ConfigError("'solvers' must be a list of objects")
    for s in cfg.solvers:
        if "algorithm" not in s:
            raise ConfigError("every solver entry needs 'algorithm'")
    return cfg


def load_config(path):
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: {e}") from None
    return config_from_dict(d, base_dir=path.parent)
