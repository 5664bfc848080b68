"""Annotation service: serves uncoded prompts to raters, records their codes
append-only, computes live agreement, and manages the resolution round.

The store is a single append-only JSONL log replayed on startup; no code can
be erased, amendments append new versions, and the mapping export applies
resolution-over-latest-consensus precedence.
"""

from __future__ import annotations

import json
import os
import re
import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query, Response
from pydantic import BaseModel

from .agreement import (
    DegenerateMarginalsError,
    cohen_kappa,
    confusion_matrix,
    disagreements,
    per_category_kappa,
)
from .model import ASSIGNABLE_MOTIVES, Motive, Provenance

_RATER_RE = re.compile(r"^[A-Za-z0-9._-]{1,64}$")
_ASSIGNABLE = {m.value for m in ASSIGNABLE_MOTIVES}

STORE_ENV_VAR = "MOTIVELOG_STORE"
DEFAULT_ROUND_SIZE = 50


class CodeSubmission(BaseModel):
    rater: str
    prompt: str
    motive: str
    submission_id: Optional[str] = None


class Resolution(BaseModel):
    prompt: str
    motive: str
    resolver: str
    submission_id: Optional[str] = None


class CodeStore:
    """In-memory coding state backed by an append-only log file."""

    def __init__(self, residual: list[tuple[str, int]], store_path: str | Path,
                 round_size: int = DEFAULT_ROUND_SIZE) -> None:
        # Queue order: frequency descending, ties lexicographic.
        self.queue = sorted(residual, key=lambda item: (-item[1], item[0]))
        self.counts = dict(self.queue)
        self.rounds = {
            prompt: (1 if i < round_size else 2)
            for i, (prompt, _) in enumerate(self.queue)
        }
        self.store_path = Path(store_path)
        self.lock = threading.Lock()
        # rater -> prompt -> list of (motive, ts, version); latest wins
        self.codes: dict[str, dict[str, list[tuple[str, int, int]]]] = {}
        self.resolutions: dict[str, tuple[str, str, int]] = {}
        self.submission_ids: set[str] = set()
        self._fp = None
        self._replay()
        self.store_path.parent.mkdir(parents=True, exist_ok=True)
        self._fp = open(self.store_path, "a", encoding="utf-8")

    def _replay(self) -> None:
        if not self.store_path.exists():
            return
        with open(self.store_path, "r", encoding="utf-8") as fp:
            for line in fp:
                line = line.strip()
                if not line:
                    continue
                self._apply(json.loads(line))

    def _apply(self, entry: dict) -> None:
        sid = entry.get("submission_id")
        if sid:
            self.submission_ids.add(sid)
        if entry["type"] == "code":
            versions = self.codes.setdefault(entry["rater"], {}).setdefault(
                entry["prompt"], []
            )
            versions.append((entry["motive"], entry["ts"], entry["version"]))
        elif entry["type"] == "resolve":
            self.resolutions[entry["prompt"]] = (
                entry["motive"],
                entry["resolver"],
                entry["ts"],
            )

    def _append(self, entry: dict) -> None:
        assert self._fp is not None
        self._fp.write(json.dumps(entry, ensure_ascii=False, separators=(",", ":")))
        self._fp.write("\n")
        self._fp.flush()
        self._apply(entry)

    def close(self) -> None:
        if self._fp is not None:
            self._fp.close()
            self._fp = None

    # -- queries --------------------------------------------------------

    def latest_codes(self, rater: str) -> dict[str, Motive]:
        out: dict[str, Motive] = {}
        for prompt, versions in self.codes.get(rater, {}).items():
            out[prompt] = Motive(versions[-1][0])
        return out

    def next_prompt(self, rater: str) -> Optional[tuple[str, int, int]]:
        coded = self.codes.get(rater, {})
        for prompt, count in self.queue:
            if prompt not in coded:
                return prompt, count, self.rounds[prompt]
        return None

    def record_code(self, rater: str, prompt: str, motive: str,
                    amend: bool, submission_id: Optional[str]) -> dict:
        with self.lock:
            if submission_id and submission_id in self.submission_ids:
                versions = self.codes.get(rater, {}).get(prompt, [])
                return {"status": "duplicate_submission", "version": len(versions)}
            existing = self.codes.get(rater, {}).get(prompt)
            if existing and not amend:
                raise HTTPException(
                    status_code=409,
                    detail="already coded by this rater; retry with ?amend=true",
                )
            version = (len(existing) if existing else 0) + 1
            self._append(
                {
                    "type": "code",
                    "rater": rater,
                    "prompt": prompt,
                    "motive": motive,
                    "ts": int(time.time() * 1000),
                    "version": version,
                    "submission_id": submission_id,
                }
            )
            return {"status": "amended" if version > 1 else "recorded", "version": version}

    def record_resolution(self, prompt: str, motive: str, resolver: str,
                          submission_id: Optional[str]) -> dict:
        with self.lock:
            if submission_id and submission_id in self.submission_ids:
                return {"status": "duplicate_submission"}
            self._append(
                {
                    "type": "resolve",
                    "prompt": prompt,
                    "motive": motive,
                    "resolver": resolver,
                    "ts": int(time.time() * 1000),
                    "submission_id": submission_id,
                }
            )
            return {"status": "resolved"}

    def export_mapping_tsv(self) -> str:
        """Final mapping: resolutions win; otherwise the latest codes of all
        raters must agree; disagreed unresolved prompts are left out."""
        lines = ["# prompt\tmotive\tprovenance\tcoder\tround"]
        for prompt, _ in self.queue:
            if prompt in self.resolutions:
                motive, resolver, _ts = self.resolutions[prompt]
                lines.append(
                    f"{prompt}\t{motive}\t{Provenance.MANUAL_CODED.value}\t{resolver}\t3"
                )
                continue
            votes = {
                rater: versions[prompt][-1][0]
                for rater, versions in self.codes.items()
                if prompt in versions
            }
            if not votes:
                continue
            motives = set(votes.values())
            if len(motives) != 1:
                continue
            coder = "+".join(sorted(votes))
            lines.append(
                f"{prompt}\t{motives.pop()}\t{Provenance.MANUAL_CODED.value}\t{coder}\t"
                f"{self.rounds[prompt]}"
            )
        return "\n".join(lines) + "\n"

    def export_rater_tsv(self, rater: str) -> str:
        lines = ["# prompt\tmotive\tprovenance\tcoder\tround"]
        for prompt, _ in self.queue:
            versions = self.codes.get(rater, {}).get(prompt)
            if not versions:
                continue
            lines.append(
                f"{prompt}\t{versions[-1][0]}\t{Provenance.MANUAL_CODED.value}\t{rater}\t"
                f"{self.rounds[prompt]}"
            )
        return "\n".join(lines) + "\n"


def _check_rater(rater: str) -> str:
    if not _RATER_RE.match(rater or ""):
        raise HTTPException(status_code=400, detail=f"invalid rater id: {rater!r}")
    return rater


def _kappa_obj(result) -> dict:
    return {
        "kappa": result.kappa,
        "po": result.po,
        "pe": result.pe,
        "se": result.se,
        "ci95": list(result.ci95),
        "n": result.n,
    }


def build_app(
    residual: list[tuple[str, int]],
    store_path: Optional[str | Path] = None,
    round_size: int = DEFAULT_ROUND_SIZE,
    ui_dir: Optional[str | Path] = None,
) -> FastAPI:
    if store_path is None:
        store_path = os.environ.get(STORE_ENV_VAR)
    if store_path is None:
        raise ValueError(f"store path required (flag or {STORE_ENV_VAR})")
    store = CodeStore(residual, store_path, round_size)
    app = FastAPI(title="motivelog annotation service")
    app.state.store = store

    @app.get("/api/prompts/next")
    def prompts_next(rater: str = Query(...)):
        _check_rater(rater)
        coded = len(store.codes.get(rater, {}))
        nxt = store.next_prompt(rater)
        if nxt is None:
            return {"done": True, "coded": coded, "total": len(store.queue)}
        prompt, count, rnd = nxt
        return {
            "done": False,
            "prompt": prompt,
            "count": count,
            "round": rnd,
            "coded": coded,
            "total": len(store.queue),
        }

    @app.post("/api/codes")
    def post_code(body: CodeSubmission, amend: bool = Query(False)):
        _check_rater(body.rater)
        if body.motive not in _ASSIGNABLE:
            raise HTTPException(status_code=400, detail=f"invalid motive: {body.motive!r}")
        if body.prompt not in store.counts:
            raise HTTPException(status_code=404, detail="unknown prompt")
        return store.record_code(body.rater, body.prompt, body.motive, amend, body.submission_id)

    @app.get("/api/agreement")
    def get_agreement(a: str = Query(...), b: str = Query(...)):
        _check_rater(a)
        _check_rater(b)
        codes_a = store.latest_codes(a)
        codes_b = store.latest_codes(b)
        common = codes_a.keys() & codes_b.keys()
        if not common:
            return {"overlap": False, "n": 0}
        matrix = confusion_matrix(codes_a, codes_b)
        per_category = []
        try:
            overall = _kappa_obj(cohen_kappa(matrix))
        except DegenerateMarginalsError:
            return {"overlap": True, "n": matrix.n, "degenerate": True}
        for motive, result in per_category_kappa(matrix):
            per_category.append(
                {
                    "motive": motive.value,
                    "kappa": _kappa_obj(result) if result is not None else None,
                }
            )
        return {
            "overlap": True,
            "n": matrix.n,
            "overall": overall,
            "per_category": per_category,
            "labels": [m.value for m in matrix.labels],
            "matrix": [list(row) for row in matrix.counts],
        }

    @app.get("/api/disagreements")
    def get_disagreements(a: str = Query(...), b: str = Query(...)):
        _check_rater(a)
        _check_rater(b)
        codes_a = store.latest_codes(a)
        codes_b = store.latest_codes(b)
        if not (codes_a.keys() & codes_b.keys()):
            return {"overlap": False, "items": []}
        items = [
            {
                "prompt": prompt,
                "a": motive_a.value,
                "b": motive_b.value,
                "count": store.counts.get(prompt, 0),
                "resolved": prompt in store.resolutions,
            }
            for prompt, motive_a, motive_b in disagreements(codes_a, codes_b, store.counts)
        ]
        return {"overlap": True, "items": items}

    @app.post("/api/resolve")
    def post_resolve(body: Resolution):
        _check_rater(body.resolver)
        if body.motive not in _ASSIGNABLE:
            raise HTTPException(status_code=400, detail=f"invalid motive: {body.motive!r}")
        if body.prompt not in store.counts:
            raise HTTPException(status_code=404, detail="unknown prompt")
        return store.record_resolution(body.prompt, body.motive, body.resolver, body.submission_id)

    @app.get("/api/mapping/export")
    def export_mapping():
        return Response(
            content=store.export_mapping_tsv(),
            media_type="text/tab-separated-values; charset=utf-8",
        )

    @app.get("/api/codes/export")
    def export_codes(rater: str = Query(...)):
        _check_rater(rater)
        return Response(
            content=store.export_rater_tsv(rater),
            media_type="text/tab-separated-values; charset=utf-8",
        )

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="console")

    return app
