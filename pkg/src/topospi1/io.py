"""JSON readers and writers for groups, presentations, sites, presheaves and functors.

Schemas are documented in docs/formats.md.  Every reader validates its
input and raises an ``InputError`` subclass on malformed data.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .errors import DanglingName, InputError, NotAFunctor, NotLatinSquare
from .grp import FinitePresentation, FiniteGroup, GroupHom, permutation_group, validate_group
from .site import (
    FiniteCategory,
    FiniteFunctor,
    Presheaf,
    PresheafMap,
    group_hom_functor,
    groupoid_site,
    validate_category,
    validate_presheaf,
)


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, separators=(",", ": ")) + "\n"


def load_json(path: str | Path) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _resolve(raw: Any, base: Path | None) -> Any:
    """Inline object, or a path relative to ``base`` pointing at one."""
    if isinstance(raw, str):
        p = Path(raw)
        if base is not None and not p.is_absolute():
            p = base / p
        return load_json(p)
    return raw


# --------------------------------------------------------------------------
# groups and presentations


def read_group(raw: dict, name: str | None = None) -> FiniteGroup:
    if not isinstance(raw, dict):
        raise NotLatinSquare("group description must be a JSON object")
    if "table" in raw:
        return validate_group(raw["table"], name=raw.get("name", name))
    if "generators" in raw:
        degree = raw.get("degree")
        gens = [tuple(int(v) for v in g) for g in raw["generators"]]
        for g in gens:
            if degree is not None and len(g) != degree:
                raise NotLatinSquare("generator length differs from degree")
            if sorted(g) != list(range(len(g))):
                raise NotLatinSquare(f"generator {list(g)} is not a permutation")
        G, _ = permutation_group(gens, degree)
        G.name = raw.get("name", name)
        return G
    raise NotLatinSquare("group description needs 'table' or 'generators'")


def group_to_json(G: FiniteGroup) -> dict:
    out = {"order": G.order, "identity": G.identity, "table": G.rows}
    if G.name:
        out["name"] = G.name
    return out


def read_presentation(raw: dict) -> FinitePresentation:
    try:
        return FinitePresentation.parse(raw["generators"], raw.get("relators", []))
    except (KeyError, TypeError) as exc:
        raise DanglingName(f"malformed presentation: {exc!r}") from None


# --------------------------------------------------------------------------
# sites and presheaves


def read_site(raw: dict, base: Path | None = None) -> FiniteCategory:
    raw = _resolve(raw, base)
    if isinstance(raw, dict) and "group" in raw:
        return groupoid_site(read_group(_resolve(raw["group"], base)))
    return validate_category(raw)


def read_presheaf(raw: dict, base: Path | None = None, site: FiniteCategory | None = None) -> Presheaf:
    if site is None:
        if "site" not in raw:
            raise DanglingName("presheaf needs a 'site'")
        site = read_site(raw["site"], base)
    return validate_presheaf(raw, site)


def read_presheaf_file(path: str | Path) -> Presheaf:
    path = Path(path)
    return read_presheaf(load_json(path), path.parent)


def map_to_json(a: PresheafMap) -> dict:
    C = a.src.category
    return {
        "components": {C.objects[c]: {a.src.sets[c][x]: a.tgt.sets[c][y] for x, y in enumerate(comp)}
                       for c, comp in enumerate(a.comps)},
    }


def read_map(raw: dict, X: Presheaf, Y: Presheaf) -> PresheafMap:
    C = X.category
    comps = []
    for c, obj in enumerate(C.objects):
        table = raw["components"].get(obj, {})
        try:
            comps.append([Y.index_of(c, table[x]) for x in X.sets[c]])
        except KeyError as exc:
            raise DanglingName(f"map component at {obj!r} mentions unknown element {exc}") from None
    return PresheafMap(X, Y, comps)


# --------------------------------------------------------------------------
# functors


def read_functor(raw: dict, base: Path | None = None) -> FiniteFunctor:
    """Either an explicit functor between sites or a group homomorphism."""
    if "group_hom" in raw:
        gh = raw["group_hom"]
        H = read_group(_resolve(gh["source"], base))
        G = read_group(_resolve(gh["target"], base))
        h = GroupHom(H, G, tuple(int(v) for v in gh["map"]))
        if len(h.map) != H.order or not h.is_homomorphism():
            raise NotAFunctor("group_hom map is not a homomorphism")
        return group_hom_functor(h)
    try:
        src = read_site(raw["source"], base)
        tgt = read_site(raw["target"], base)
        return FiniteFunctor(src, tgt, raw["objects"], raw.get("morphisms", {}))
    except KeyError as exc:
        raise DanglingName(f"malformed functor: missing {exc}") from None


# --------------------------------------------------------------------------
# tagged values for counterexample files


def encode(value: Any) -> Any:
    if isinstance(value, Presheaf):
        return {"type": "presheaf", **value.to_json()}
    if isinstance(value, PresheafMap):
        return {"type": "map", "src": encode(value.src), "tgt": encode(value.tgt), **map_to_json(value)}
    if isinstance(value, FiniteCategory):
        return {"type": "site", **value.to_json()}
    if isinstance(value, FiniteGroup):
        return {"type": "group", **group_to_json(value)}
    if isinstance(value, GroupHom):
        return {"type": "group_hom", "source": encode(value.src), "target": encode(value.tgt), "map": list(value.map)}
    if isinstance(value, FiniteFunctor):
        return {"type": "functor", **value.to_json()}
    if isinstance(value, (list, tuple)):
        return {"type": "list", "items": [encode(v) for v in value]}
    if isinstance(value, (int, str, bool)) or value is None:
        return value
    raise TypeError(f"cannot encode {type(value).__name__}")


def decode(raw: Any) -> Any:
    if not isinstance(raw, dict):
        return raw
    kind = raw.get("type")
    if kind == "presheaf":
        return read_presheaf(raw)
    if kind == "map":
        return read_map(raw, decode(raw["src"]), decode(raw["tgt"]))
    if kind == "site":
        return validate_category(raw)
    if kind == "group":
        return read_group(raw)
    if kind == "group_hom":
        return GroupHom(decode(raw["source"]), decode(raw["target"]), tuple(raw["map"]))
    if kind == "functor":
        return read_functor(raw)
    if kind == "list":
        return [decode(v) for v in raw["items"]]
    raise InputError(f"unknown tagged value {kind!r}")
