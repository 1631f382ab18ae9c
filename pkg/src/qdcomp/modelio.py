"""JSON model files and the built-in example models.

Model file layout::

    {
      "d": 2,
      "N": 3,
      "symbols": [[[1, 0], [0, 0]], ...],     # N vectors of d [re, im] pairs
      "law": {"type": "iid", "p": [...]}
           | {"type": "markov", "P": [[...]], "p": [...]}   # P column-stochastic
           | {"type": "general", "tree": {"depth": D, "p": [...], "next": {"0": {...}}}}
    }

Symbol indices (including ``next`` keys) are 0-based. Unknown fields are
rejected.
"""
import json
import math

import jsonschema
import numpy as np

from .ensembles import EnsembleModel, GeneralLaw, IIDLaw, MarkovLaw, SymbolSet
from .errors import ContractError

_NUMBER_LIST = {"type": "array", "items": {"type": "number"}, "minItems": 1}

_NODE = {
    "type": "object",
    "properties": {
        "p": _NUMBER_LIST,
        "next": {
            "type": "object",
            "patternProperties": {"^[0-9]+$": {"$ref": "#/$defs/node"}},
            "additionalProperties": False,
        },
    },
    "required": ["p"],
    "additionalProperties": False,
}

MODEL_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"node": _NODE},
    "type": "object",
    "properties": {
        "d": {"type": "integer", "minimum": 1},
        "N": {"type": "integer", "minimum": 1},
        "symbols": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
        "law": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {"type": {"const": "iid"}, "p": _NUMBER_LIST},
                    "required": ["type", "p"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "markov"},
                        "P": {"type": "array", "items": _NUMBER_LIST, "minItems": 1},
                        "p": _NUMBER_LIST,
                    },
                    "required": ["type", "P", "p"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "general"},
                        "tree": {
                            "type": "object",
                            "properties": {
                                "depth": {"type": "integer", "minimum": 0},
                                "p": _NUMBER_LIST,
                                "next": _NODE["properties"]["next"],
                            },
                            "required": ["depth", "p"],
                            "additionalProperties": False,
                        },
                    },
                    "required": ["type", "tree"],
                    "additionalProperties": False,
                },
            ]
        },
    },
    "required": ["d", "N", "symbols", "law"],
    "additionalProperties": False,
}


class ModelFileError(ContractError):
    """A model file failed to parse or validate; the message names the location."""


def _where(path):
    return "/".join(str(p) for p in path) or "<root>"


def _best_error(obj):
    validator = jsonschema.Draft202012Validator(MODEL_SCHEMA)
    errors = list(validator.iter_errors(obj))
    if not errors:
        return None
    err = jsonschema.exceptions.best_match(errors)
    # oneOf failures on "law" are more useful when pointed at the chosen branch
    if err.context:
        kind = obj.get("law", {}).get("type") if isinstance(obj.get("law"), dict) else None
        branch = {"iid": 0, "markov": 1, "general": 2}.get(kind)
        sub = [e for e in err.context if branch is not None and e.schema_path and e.schema_path[0] == branch]
        if sub:
            err = jsonschema.exceptions.best_match(sub)
    return err


def _check_tree(node, N, depth, level, path):
    if len(node["p"]) != N:
        raise ModelFileError(f"field {path}/p: expected {N} probabilities, got {len(node['p'])}")
    children = node.get("next", {})
    if level < depth:
        missing = [str(k) for k in range(N) if str(k) not in children]
        if missing:
            raise ModelFileError(f"field {path}/next: missing children {', '.join(missing)} at level {level} < depth {depth}")
    elif children:
        raise ModelFileError(f"field {path}/next: nodes at the declared depth {depth} must not have children")
    for key, child in children.items():
        if int(key) >= N:
            raise ModelFileError(f"field {path}/next/{key}: symbol index out of range 0..{N - 1}")
        _check_tree(child, N, depth, level + 1, f"{path}/next/{key}")


def model_from_dict(obj, name=""):
    err = _best_error(obj)
    if err is not None:
        raise ModelFileError(f"field {_where(err.absolute_path)}: {err.message}")
    d, N = obj["d"], obj["N"]
    syms = obj["symbols"]
    if len(syms) != N:
        raise ModelFileError(f"field symbols: expected N={N} vectors, got {len(syms)}")
    for i, v in enumerate(syms):
        if len(v) != d:
            raise ModelFileError(f"field symbols/{i}: expected d={d} entries, got {len(v)}")
    states = np.array([[complex(re, im) for re, im in v] for v in syms])
    law_obj = obj["law"]
    kind = law_obj["type"]
    if kind == "iid":
        if len(law_obj["p"]) != N:
            raise ModelFileError(f"field law/p: expected {N} probabilities")
        law = IIDLaw(law_obj["p"])
    elif kind == "markov":
        P = law_obj["P"]
        if len(P) != N or any(len(row) != N for row in P):
            raise ModelFileError(f"field law/P: expected an {N}x{N} matrix")
        if len(law_obj["p"]) != N:
            raise ModelFileError(f"field law/p: expected {N} probabilities")
        law = MarkovLaw(P, law_obj["p"])
    else:
        tree = law_obj["tree"]
        _check_tree(tree, N, tree["depth"], 0, "law/tree")
        law = GeneralLaw.from_tree(N, tree)
    return EnsembleModel(SymbolSet(states), law, name=name)


def load_model(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read model file {path}: {exc.strerror}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return model_from_dict(obj, name=str(path))


def model_to_dict(model):
    sym = model.symbols
    law = model.law
    if not np.allclose(sym.basis, np.eye(sym.d)):
        raise ContractError("only models in the standard basis can be serialized")
    out = {
        "d": sym.d,
        "N": sym.N,
        "symbols": [[[float(z.real), float(z.imag)] for z in v] for v in sym.states],
    }
    if isinstance(law, IIDLaw):
        out["law"] = {"type": "iid", "p": law.p.tolist()}
    elif isinstance(law, MarkovLaw):
        out["law"] = {"type": "markov", "P": law.P.tolist(), "p": law.p.tolist()}
    elif getattr(law, "tree", None) is not None:
        out["law"] = {"type": "general", "tree": law.tree}
    else:
        raise ContractError("general laws without a probability tree cannot be serialized")
    return out


def dump_model(model, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")


# ------------------------------------------------------------ built-ins


def trine_model():
    """Three trine states, zero-diagonal transition matrix, uniform start."""
    r = math.sqrt(3) / 2
    states = [[1.0, 0.0], [-0.5, r], [-0.5, -r]]
    P = [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]
    return EnsembleModel(SymbolSet(states), MarkovLaw(P, [1 / 3] * 3), name="trine")


def bell_model():
    """``e1, e2, |+>, |->`` with block transition matrix, uniform start."""
    h = 1 / math.sqrt(2)
    states = [[1.0, 0.0], [0.0, 1.0], [h, h], [h, -h]]
    P = [
        [0.5, 0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.5],
        [0.0, 0.0, 0.5, 0.5],
    ]
    return EnsembleModel(SymbolSet(states), MarkovLaw(P, [0.25] * 4), name="bell")


def iid_demo_model():
    """``|0>`` and ``|+>`` emitted independently with probability 1/2 each."""
    h = 1 / math.sqrt(2)
    return EnsembleModel(SymbolSet([[1.0, 0.0], [h, h]]), IIDLaw([0.5, 0.5]), name="iid-demo")


BUILTIN_MODELS = {
    "trine": trine_model,
    "bell": bell_model,
    "iid-demo": iid_demo_model,
}


def builtin_model(name):
    try:
        return BUILTIN_MODELS[name]()
    except KeyError:
        raise ContractError(f"unknown built-in model {name!r}; choose from {', '.join(BUILTIN_MODELS)}") from None
