"""Canonical JSON serialization and content hashing.

Every on-disk artifact and every wire payload goes through these helpers so
that identical inputs always produce identical bytes.
"""
from __future__ import annotations

import hashlib
import json


def canonical_dumps(obj) -> str:
    """Serialize to canonical JSON: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def content_hash(obj) -> str:
    """Short stable digest of a JSON-serializable object."""
    data = canonical_dumps(obj).encode("utf-8")
    return hashlib.blake2b(data, digest_size=8).hexdigest()


def hash64(text: str) -> str:
    """64-bit digest of declaration text, as 16 hex chars."""
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()
