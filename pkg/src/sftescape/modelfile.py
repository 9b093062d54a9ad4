"""JSON model files.

Schema::

    {
      "alphabet": ["1", "2", "3"],
      "matrix": [[0, 1, 1], [1, 0, 1], [1, 1, 1]],
      "potential": {"order": 2,
                    "entries": [{"word": ["1", "2"], "value": -1.6094}, ...]},
      "normalize": false,
      "delta": ["1", "2"]
    }

Unknown top-level keys are ignored, so an ``analyze`` report can be read
back as a model file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .errors import InvalidModelError
from .sft import SftModel, admissible_words
from .transfer import CylindricalPotential, normalize as normalize_potential


@dataclass(frozen=True, eq=False)
class ModelSpec:
    model: SftModel
    potential: CylindricalPotential
    delta: tuple[str, ...]
    normalize: bool = False

    def working_potential(self) -> CylindricalPotential:
        return normalize_potential(self.potential) if self.normalize else self.potential

    def to_dict(self) -> dict:
        model = self.model
        entries = [
            {"word": list(model.decode(w)), "value": v}
            for w, v in sorted(self.potential.values.items())
        ]
        return {
            "alphabet": list(model.symbols),
            "matrix": model.matrix.astype(int).tolist(),
            "potential": {"order": self.potential.order, "entries": entries},
            "normalize": self.normalize,
            "delta": list(self.delta),
        }


def _require(data: dict, key: str, kind):
    if key not in data:
        raise InvalidModelError(f"model file is missing {key!r}")
    value = data[key]
    if not isinstance(value, kind):
        raise InvalidModelError(f"{key!r} has the wrong type ({type(value).__name__})")
    return value


def parse_model(data: dict) -> ModelSpec:
    if not isinstance(data, dict):
        raise InvalidModelError("model file must contain a JSON object")
    alphabet = _require(data, "alphabet", list)
    model = SftModel(alphabet, _require(data, "matrix", list))

    pot = _require(data, "potential", dict)
    order = _require(pot, "order", int)
    values = {}
    for entry in _require(pot, "entries", list):
        if not isinstance(entry, dict) or "word" not in entry or "value" not in entry:
            raise InvalidModelError(f"malformed potential entry {entry!r}")
        word = model.encode(entry["word"])
        if word in values:
            raise InvalidModelError(f"duplicate potential entry for word {entry['word']}")
        value = entry["value"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidModelError(f"potential value for {entry['word']} is not a number")
        values[word] = value
    potential = CylindricalPotential(model, order, values)
    missing = [w for w in admissible_words(model, order) if w not in potential.values]
    if missing:
        raise InvalidModelError(
            f"missing potential values for {len(missing)} admissible words, e.g. {list(model.decode(missing[0]))}"
        )

    delta = data.get("delta", [])
    if not isinstance(delta, list):
        raise InvalidModelError("'delta' must be a list of symbol labels")
    delta = tuple(str(s) for s in delta)
    for s in delta:
        model.index(s)
    normalize = data.get("normalize", False)
    if not isinstance(normalize, bool):
        raise InvalidModelError("'normalize' must be true or false")
    return ModelSpec(model, potential, delta, normalize)


def load_model(path) -> ModelSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidModelError(f"cannot read model file: {exc}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidModelError(f"model file is not valid JSON: {exc}") from None
    return parse_model(data)
