"""Protocol conformance: the primary toolkit's codec must parse every reply.

The adapter is exercised as a black box over its standard streams; the
client side is acckit's own transport/roundtrip code, so any shape drift
shows up here as a codec error.
"""

import json

import pytest
from acckit.backends import BackendError, ProcessTransport, backend_roundtrip

from conftest import FIXTURES, adapter_cmd


def load_fixture():
    by_role = {}
    with (FIXTURES / "conformance.ndjson").open(encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            by_role.setdefault(rec["role"], []).append(rec["request"])
    return by_role


def test_fixture_has_50_requests():
    by_role = load_fixture()
    assert sum(len(v) for v in by_role.values()) == 50


PAYLOAD_KEYS = {"embed": "vectors", "classify": "label", "correct": ("span", "st"), "read": "spans"}


@pytest.mark.parametrize("role", ["embedder", "classifier", "corrector", "reader"])
def test_conformance_zero_codec_errors(role):
    requests = load_fixture()[role]
    transport = ProcessTransport(adapter_cmd("--role", role, "--model", "hash"))
    errors = []
    try:
        for request in requests:
            try:
                response = backend_roundtrip(request, transport, timeout=30.0)
            except BackendError as e:
                errors.append(f"{request}: {e}")
                continue
            keys = PAYLOAD_KEYS[request["op"]]
            keys = keys if isinstance(keys, tuple) else (keys,)
            if not any(k in response for k in keys):
                errors.append(f"{request}: payload missing {keys}")
            if request["op"] == "classify" and response.get("label") not in (
                "correct",
                "partially",
                "wrong",
            ):
                errors.append(f"{request}: bad label {response.get('label')!r}")
            if request["op"] == "embed" and len(response["vectors"]) != len(request["tokens"]):
                errors.append(f"{request}: vector count mismatch")
    finally:
        transport.close()
    assert errors == []


def test_inference_failure_keeps_server_alive():
    transport = ProcessTransport(adapter_cmd("--role", "embedder", "--model", "hash"))
    try:
        with pytest.raises(BackendError, match="tokens list"):
            backend_roundtrip({"id": 1, "op": "embed", "tokens": "not-a-list"}, transport, 10.0)
        ok = backend_roundtrip({"id": 2, "op": "embed", "tokens": ["still", "alive"]}, transport, 10.0)
        assert len(ok["vectors"]) == 2
    finally:
        transport.close()


def test_wrong_op_is_an_error_response():
    transport = ProcessTransport(adapter_cmd("--role", "classifier", "--model", "hash"))
    try:
        with pytest.raises(BackendError, match="not served"):
            backend_roundtrip({"id": 1, "op": "embed", "tokens": ["x"]}, transport, 10.0)
    finally:
        transport.close()


def test_bad_model_exits_with_diagnostic(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "acc_adapter.server", "--role", "embedder", "--model", str(tmp_path / "missing")],
        input="",
        capture_output=True,
        text=True,
        timeout=120,
    )
    assert proc.returncode == 1
    assert "cannot start" in proc.stderr
