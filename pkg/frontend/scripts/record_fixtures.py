#!/usr/bin/env python3
"""Record service fixtures for the console's contract tests.

Runs the real annotation service in-process, plays a scripted two-rater
coding session (50 prompts each, a handful of disagreements, one
resolution, one restart), and writes every request/response pair the
console would see into tests/fixtures/. The offline kappa is computed from
the exported rater TSVs with the agreement module and must equal the
service's value exactly; recording aborts otherwise.

Usage: python3 scripts/record_fixtures.py   (from frontend/)
"""

import json
import sys
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from motivelog import io as mio
from motivelog.agreement import cohen_kappa, confusion_matrix
from motivelog.model import ASSIGNABLE_MOTIVES
from motivelog.service import build_app

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

RESIDUAL = [
    (f"enter delivery note {i:02d}" if i % 3 else f"write review {i:02d}", 500 - 7 * i)
    for i in range(60)
]

# deterministic coding functions: R3 deviates on every 9th coded prompt
def motive_r2(prompt: str, index: int) -> str:
    return ASSIGNABLE_MOTIVES[sum(map(ord, prompt)) % 7].value


def motive_r3(prompt: str, index: int) -> str:
    shift = 3 if index % 9 == 0 else 0
    return ASSIGNABLE_MOTIVES[(sum(map(ord, prompt)) + shift) % 7].value


def record(client: TestClient, steps: list, method: str, url: str, body=None, params=""):
    if method == "GET":
        response = client.get(url)
    else:
        response = client.post(url, json=body)
    steps.append(
        {
            "request": {"method": method, "url": url, "body": body},
            "response": {"status": response.status_code, "json": response.json()},
        }
    )
    return response.json()


def main() -> int:
    FIXTURES.mkdir(parents=True, exist_ok=True)
    store = Path(tempfile.mkdtemp()) / "codes.jsonl"
    app = build_app(residual=RESIDUAL, store_path=store, round_size=50)
    client = TestClient(app)

    coding_steps: list = []
    submission_seq = 0
    for rater, motive_of in (("R2", motive_r2), ("R3", motive_r3)):
        for index in range(50):
            nxt = record(client, coding_steps, "GET", f"/api/prompts/next?rater={rater}")
            assert not nxt["done"]
            submission_seq += 1
            result = record(
                client,
                coding_steps,
                "POST",
                "/api/codes",
                body={
                    "rater": rater,
                    "prompt": nxt["prompt"],
                    "motive": motive_of(nxt["prompt"], index),
                    "submission_id": f"fixture-{submission_seq:04d}",
                },
            )
            assert result["status"] == "recorded", result

    agreement = client.get("/api/agreement?a=R2&b=R3").json()
    disagreements_before = client.get("/api/disagreements?a=R2&b=R3").json()
    export_r2 = client.get("/api/codes/export?rater=R2").text
    export_r3 = client.get("/api/codes/export?rater=R3").text

    offline = cohen_kappa(
        confusion_matrix(mio.parse_rater_codes(export_r2), mio.parse_rater_codes(export_r3))
    )
    if offline.kappa != agreement["overall"]["kappa"]:
        print("FATAL: offline kappa differs from service kappa", file=sys.stderr)
        return 1

    open_items = [i for i in disagreements_before["items"] if not i["resolved"]]
    assert open_items, "scenario must produce at least one disagreement"
    target = open_items[0]
    resolve_response = client.post(
        "/api/resolve",
        json={
            "prompt": target["prompt"],
            "motive": "Posting",
            "resolver": "R1",
            "submission_id": "fixture-resolve-0001",
        },
    ).json()
    disagreements_after = client.get("/api/disagreements?a=R2&b=R3").json()
    export_after_resolve = client.get("/api/mapping/export").text
    app.state.store.close()

    restarted = build_app(residual=RESIDUAL, store_path=store, round_size=50)
    with TestClient(restarted) as client2:
        export_after_restart = client2.get("/api/mapping/export").text
    restarted.state.store.close()

    (FIXTURES / "coding_session.json").write_text(
        json.dumps(coding_steps, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (FIXTURES / "agreement.json").write_text(
        json.dumps(agreement, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    (FIXTURES / "disagreements.json").write_text(
        json.dumps(
            {
                "before": disagreements_before,
                "after": disagreements_after,
                "resolved_prompt": target["prompt"],
                "resolve_request": {
                    "prompt": target["prompt"],
                    "motive": "Posting",
                    "resolver": "R1",
                },
                "resolve_response": resolve_response,
            },
            indent=2,
            ensure_ascii=False,
        )
        + "\n",
        encoding="utf-8",
    )
    (FIXTURES / "meta.json").write_text(
        json.dumps(
            {
                "offline_kappa": offline.kappa,
                "offline_ci95": list(offline.ci95),
                "service_kappa": agreement["overall"]["kappa"],
                "n_common": agreement["n"],
                "open_disagreements": len(open_items),
            },
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    (FIXTURES / "mapping_export_after_resolve.txt").write_text(
        export_after_resolve, encoding="utf-8"
    )
    (FIXTURES / "mapping_export_after_restart.txt").write_text(
        export_after_restart, encoding="utf-8"
    )
    print(
        f"recorded: {len(coding_steps)} coding steps, kappa={offline.kappa:.6f}, "
        f"{len(open_items)} open disagreements"
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
