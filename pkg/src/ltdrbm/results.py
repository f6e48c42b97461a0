"""Result payloads (JSON/CSV), config files and run manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import math
from pathlib import Path

import numpy as np

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from .claims import Dataset
from .rbm import TruthEstimate, adjust_dataset
from .reliability import ReliabilityModel


class ConfigError(ValueError):
    pass


def load_config(path) -> dict:
    path = Path(path)
    try:
        if path.suffix.lower() == ".toml":
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping")
    return data


def _num(x):
    x = float(x)
    return None if math.isnan(x) else x


def result_payload(algorithm: str, dataset: Dataset, estimate: TruthEstimate, model,
                   config: dict, seed: int) -> dict:
    fact_names = dataset.fact_names or [str(f) for f in range(dataset.n_facts)]
    source_names = dataset.source_names or [str(s) for s in range(dataset.n_sources)]
    payload = {
        "algorithm": algorithm,
        "facts": [{"fact": n, "plausibility": _num(p)}
                  for n, p in zip(fact_names, estimate.plausibility.tolist())],
        "attributes": [],
        "sources": [],
        "prevalence": None,
        "config_echo": config,
        "seed": seed,
    }
    if dataset.is_categorical:
        adj = estimate.adjusted if estimate.adjusted is not None \
            else adjust_dataset(estimate.plausibility, dataset)
        attr_names = dataset.attribute_names or [str(a) for a in range(dataset.n_attributes)]
        value_names = dataset.value_names or [str(v) for v in range(int(dataset.fact_value.max()) + 1)]
        payload["attributes"] = [
            {"attribute": attr_names[a], "value": value_names[v], "adjusted": _num(p)}
            for a, v, p in zip(dataset.fact_attr.tolist(), dataset.fact_value.tolist(), adj.tolist())
        ]
    if isinstance(model, ReliabilityModel):
        payload["sources"] = [{"source": n, "tpr": t, "fpr": f}
                              for n, t, f in zip(source_names, model.tpr.tolist(), model.fpr.tolist())]
        payload["prevalence"] = model.prevalence
    elif isinstance(model, np.ndarray):
        payload["sources"] = [{"source": n, "error": e}
                              for n, e in zip(source_names, model.tolist())]
    return payload


def write_json(path, data) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _write_rows(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def write_result(out_dir, payload: dict) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / "result.json", out / "facts.csv"]
    write_json(paths[0], payload)
    _write_rows(paths[1], ["fact", "plausibility"],
                [(r["fact"], r["plausibility"]) for r in payload["facts"]])
    if payload["attributes"]:
        paths.append(out / "attributes.csv")
        _write_rows(paths[-1], ["attribute", "value", "adjusted"],
                    [(r["attribute"], r["value"], r["adjusted"]) for r in payload["attributes"]])
    if payload["sources"]:
        paths.append(out / "sources.csv")
        keys = [k for k in payload["sources"][0]]
        _write_rows(paths[-1], keys, [[r[k] for k in keys] for r in payload["sources"]])
    return paths


def winners_from_payload(payload: dict) -> dict[str, str]:
    """Attribute -> value with the highest adjusted plausibility (first listed wins ties)."""
    best: dict[str, tuple[float, str]] = {}
    for row in payload["attributes"]:
        cur = best.get(row["attribute"])
        if cur is None or row["adjusted"] > cur[0]:
            best[row["attribute"]] = (row["adjusted"], row["value"])
    return {a: v for a, (_, v) in best.items()}


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
