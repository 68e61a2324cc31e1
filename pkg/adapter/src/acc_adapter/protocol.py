"""Request loop: one JSON line in, one JSON line out, ids echoed back.

Per-request failures become error responses and the server stays alive;
only construction-time model loading is allowed to kill the process.
"""

from __future__ import annotations

import json
import sys
from typing import IO, Protocol


class RoleHandler(Protocol):
    ops: tuple[str, ...]

    def handle(self, request: dict) -> dict: ...


def serve_forever(handler: RoleHandler, stdin: IO[str] | None = None, stdout: IO[str] | None = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        try:
            request = json.loads(line)
            rid = request.get("id")
        except json.JSONDecodeError:
            request, rid = None, None
        if request is None:
            response = {"id": rid, "error": "unparseable request line"}
        else:
            op = request.get("op")
            if op not in handler.ops:
                response = {"id": rid, "error": f"op {op!r} not served by this role"}
            else:
                try:
                    response = {"id": rid, **handler.handle(request)}
                except Exception as e:  # noqa: BLE001 - every inference failure must answer
                    response = {"id": rid, "error": str(e)}
        stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        stdout.flush()
