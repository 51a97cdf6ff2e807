"""Reading system inputs from files.

A plain file is one stdin source.  A JSON object of the form
{"sources": [["arg0", "2"], ["stdin", "text"]]} describes multi-source
inputs; values are text, or {"hex": "..."} for raw bytes.
"""

from __future__ import annotations

import json

from .minic.values import SystemInput


def parse_input_spec(data: bytes) -> SystemInput:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError):
        return SystemInput((("stdin", data),))
    if not (isinstance(obj, dict) and isinstance(obj.get("sources"), list)):
        return SystemInput((("stdin", data),))
    sources = []
    for entry in obj["sources"]:
        name, value = entry
        if isinstance(value, dict) and "hex" in value:
            content = bytes.fromhex(value["hex"])
        else:
            content = str(value).encode("utf-8")
        sources.append((str(name), content))
    return SystemInput(tuple(sources))


def load_input_file(path) -> SystemInput:
    with open(path, "rb") as fh:
        return parse_input_spec(fh.read())
