"""Scripted line-protocol backend used by the transport tests.

Spawned as ``python wire_backend.py <mode>``; modes exercise the happy path
and the protocol failure cases.
"""

import json
import sys
import time


def main():
    mode = sys.argv[1] if len(sys.argv) > 1 else "echo"
    for line in sys.stdin:
        if not line.strip():
            continue
        req = json.loads(line)
        rid, op = req["id"], req["op"]
        if mode == "mismatch":
            reply = {"id": rid + 999, "label": "correct"}
        elif mode == "garbage":
            print("this is not json", flush=True)
            continue
        elif mode == "slow":
            time.sleep(3)
            reply = {"id": rid, "label": "correct"}
        elif mode == "error":
            reply = {"id": rid, "error": "deliberate failure"}
        elif mode == "badlabel":
            reply = {"id": rid, "label": "excellent"}
        elif mode == "shortembed":
            reply = {"id": rid, "vectors": [[1.0, 0.0]]}
        elif op == "classify":
            label = "correct" if req["prediction"] in req["context"] else "wrong"
            reply = {"id": rid, "label": label}
        elif op == "correct":
            if mode == "pointer":
                n = len(req["context"].split())
                st = [0.0] * n
                ed = [0.0] * n
                st[0] = 1.0
                ed[min(1, n - 1)] = 1.0
                reply = {"id": rid, "st": st, "ed": ed}
            else:
                reply = {"id": rid, "span": req["prediction"].upper()}
        elif op == "read":
            reply = {"id": rid, "spans": req["context"].split()[:2]}
        elif op == "embed":
            dim = 4
            reply = {
                "id": rid,
                "vectors": [[1.0 if i == len(t) % dim else 0.0 for i in range(dim)] for t in req["tokens"]],
            }
        else:
            reply = {"id": rid, "error": f"unknown op {op}"}
        print(json.dumps(reply), flush=True)


if __name__ == "__main__":
    main()
