"""JSON serialization of both languages' ASTs as tagged-union objects.

Every node becomes an object with a `node` field holding the class name and
one field per dataclass field; tuples become arrays.  Top-level documents
carry a `schema` version tag.  `ast_schema()` builds the JSON Schema that
all emitted documents validate against; the checked-in copy lives in
`data/ast.schema.json` and a test asserts the two stay identical.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path as FsPath

from cdot import gadt as G
from cdot import syntax as S
from cdot.diagnostics import Diagnostic

SCHEMA_VERSION = 1

SCHEMA_PATH = FsPath(__file__).parent / "data" / "ast.schema.json"

_CDOT_NODES = (
    S.Label, S.Path, S.Top, S.Bot, S.FieldDecl, S.TypeDecl, S.And, S.Rec,
    S.Forall, S.Projection, S.Singleton, S.Lambda, S.ObjectVal, S.Apply,
    S.Let, S.Case, S.FieldDef, S.TypeDef, S.AndDef, S.NoDefs,
)

_GADT_NODES = (
    G.TyVar, G.UnitTy, G.Product, G.Arrow, G.ForallTy, G.Applied,
    G.GVar, G.UnitVal, G.GTuple, G.Fst, G.Snd, G.GLam, G.GApp, G.TyLam,
    G.TyApp, G.Fix, G.LetIn, G.Construct, G.MatchGadt, G.Branch,
    G.CtorSig, G.GadtSig,
)

_ALL_NODES = _CDOT_NODES + _GADT_NODES + (Diagnostic,)

_BY_NAME = {cls.__name__: cls for cls in _ALL_NODES}


def to_json(node):
    """Recursively serialize an AST node, tuple, or primitive."""
    if node is None or isinstance(node, (str, int, bool)):
        return node
    if isinstance(node, (tuple, list)):
        return [to_json(x) for x in node]
    if isinstance(node, G.Signature):
        return {"node": "Signature",
                "gadts": [to_json(g) for g in node.gadts.values()]}
    if dataclasses.is_dataclass(node):
        out = {"node": type(node).__name__}
        for f in dataclasses.fields(node):
            out[f.name] = to_json(getattr(node, f.name))
        return out
    raise TypeError(f"cannot serialize {node!r}")


def from_json(obj):
    """Rebuild an AST node from its `to_json` image."""
    if obj is None or isinstance(obj, (str, int, bool)):
        return obj
    if isinstance(obj, list):
        return tuple(from_json(x) for x in obj)
    if not isinstance(obj, dict) or "node" not in obj:
        raise ValueError(f"not a serialized node: {obj!r}")
    name = obj["node"]
    if name == "Signature":
        return G.Signature([from_json(g) for g in obj["gadts"]])
    cls = _BY_NAME.get(name)
    if cls is None:
        raise ValueError(f"unknown node kind {name!r}")
    kwargs = {}
    for f in dataclasses.fields(cls):
        if f.name not in obj:
            raise ValueError(f"{name} is missing field {f.name!r}")
        kwargs[f.name] = from_json(obj[f.name])
    return cls(**kwargs)


def document(**payload) -> dict:
    """A top-level JSON document with the schema version stamped in."""
    return {"schema": SCHEMA_VERSION, **payload}


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False)


# ---------------------------------------------------------------- schema


def _field_schema(f: dataclasses.Field) -> dict:
    ann = f.type if isinstance(f.type, str) else getattr(f.type, "__name__", "")
    if ann == "str":
        return {"type": "string"}
    if ann == "int":
        return {"type": "integer"}
    if ann == "bool":
        return {"type": "boolean"}
    if ann.startswith("tuple"):
        return {"type": "array", "items": {"$ref": "#/$defs/value"}}
    if "| None" in ann or ann.startswith("Optional"):
        return {"anyOf": [{"$ref": "#/$defs/value"}, {"type": "null"}]}
    return {"$ref": "#/$defs/anyNode"}


def _node_schema(cls) -> dict:
    props = {"node": {"const": cls.__name__}}
    required = ["node"]
    for f in dataclasses.fields(cls):
        props[f.name] = _field_schema(f)
        required.append(f.name)
    return {"type": "object", "properties": props,
            "required": required, "additionalProperties": False}


def ast_schema() -> dict:
    """The JSON Schema for every document the command-line tool emits."""
    defs = {cls.__name__: _node_schema(cls) for cls in _ALL_NODES}
    defs["Signature"] = {
        "type": "object",
        "properties": {"node": {"const": "Signature"},
                       "gadts": {"type": "array",
                                 "items": {"$ref": "#/$defs/GadtSig"}}},
        "required": ["node", "gadts"],
        "additionalProperties": False,
    }
    defs["anyNode"] = {"oneOf": [{"$ref": f"#/$defs/{name}"}
                                 for name in sorted(defs)
                                 if name != "anyNode"]}
    defs["value"] = {"anyOf": [{"$ref": "#/$defs/anyNode"},
                               {"type": "string"}, {"type": "integer"},
                               {"type": "boolean"}, {"type": "null"},
                               {"type": "array",
                                "items": {"$ref": "#/$defs/value"}}]}
    return {
        "$schema": "http://json-schema.org/draft-07/schema#",
        "title": "Calculus AST documents",
        "type": "object",
        "properties": {
            "schema": {"const": SCHEMA_VERSION},
            "command": {"type": "string"},
            "file": {"type": "string"},
            "status": {"enum": ["ok", "error", "stuck", "out-of-fuel"]},
            "type": {"$ref": "#/$defs/anyNode"},
            "term": {"$ref": "#/$defs/anyNode"},
            "value": {"$ref": "#/$defs/anyNode"},
            "normal_form": {"$ref": "#/$defs/anyNode"},
            "signature": {"$ref": "#/$defs/Signature"},
            "diagnostic": {"$ref": "#/$defs/Diagnostic"},
            "steps": {"type": "integer"},
            "kind": {"type": "string"},
            "text": {"type": "string"},
            "trace": {"type": "array", "items": {"type": "string"}},
            "results": {"type": "array"},
        },
        "required": ["schema"],
        "additionalProperties": True,
        "$defs": defs,
    }


def write_schema(path: FsPath | None = None) -> FsPath:
    """Write the generated schema to its checked-in location."""
    target = path or SCHEMA_PATH
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(json.dumps(ast_schema(), indent=2) + "\n")
    return target
