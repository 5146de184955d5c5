"""Evidence retrieval and verification over a multi-modal data lake."""

import json as _json

from . import _verifai
from ._verifai import (
    BenchError,
    ContentIndex,
    ContractError,
    CorruptionError,
    IndexError,
    IngestError,
    LakeError,
    NotFoundError,
    ParseError,
    VerifaiError,
    embed_text,
    feature_hash,
    index_lake,
    maxsim_score,
    normalize_value,
    parse_verdict,
    render_completion_prompt,
    tokenize,
)

__all__ = [
    "BenchError",
    "ContentIndex",
    "ContractError",
    "CorruptionError",
    "Engine",
    "IndexError",
    "IngestError",
    "LakeError",
    "NotFoundError",
    "ParseError",
    "VerifaiError",
    "embed_text",
    "feature_hash",
    "imputed_tuple",
    "index_lake",
    "list_lineage",
    "load_lineage",
    "maxsim_score",
    "normalize_value",
    "parse_verdict",
    "render_completion_prompt",
    "run_benchmark",
    "serialize_object",
    "textual_claim",
    "tokenize",
    "write_benchmark",
]


def imputed_tuple(object_id, table_id, schema, cells, key_attrs, target_attr):
    """Object record for an imputed tuple."""
    return {
        "object_id": object_id,
        "kind": "imputed_tuple",
        "tuple": {
            "table_id": table_id,
            "schema": list(schema),
            "cells": list(cells),
            "key_attrs": list(key_attrs),
        },
        "target_attr": target_attr,
    }


def textual_claim(object_id, text):
    return {"object_id": object_id, "kind": "textual_claim", "claim_text": text}


def serialize_object(obj):
    return _verifai.serialize_object(_json.dumps(obj))


class Engine:
    """A loaded lake plus its persisted indexes."""

    def __init__(self, lake_dir, index_dir="", log_path="", k=100):
        self._engine = _verifai.Engine(str(lake_dir), str(index_dir), str(log_path), k)

    def __len__(self):
        return len(self._engine)

    def verify(self, obj):
        """Returns the verification report as a dict."""
        return _json.loads(self._engine.verify(_json.dumps(obj)))


def write_benchmark(spec, out_dir):
    _verifai.write_benchmark(_json.dumps(spec), str(out_dir))


def run_benchmark(spec):
    """Metric rows for a generated benchmark."""
    return _json.loads(_verifai.run_benchmark(_json.dumps(spec)))


def list_lineage(log_path):
    return _json.loads(_verifai.list_lineage(str(log_path)))


def load_lineage(log_path, lineage_id):
    return _json.loads(_verifai.load_lineage(str(log_path), lineage_id))
