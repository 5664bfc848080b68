import pytest
from fastapi.testclient import TestClient

from motivelog import io as mio
from motivelog.agreement import cohen_kappa, confusion_matrix
from motivelog.model import ASSIGNABLE_MOTIVES, Motive
from motivelog.service import build_app

RESIDUAL = [(f"prompt {i:03d}", 100 - i) for i in range(60)]


@pytest.fixture()
def store_path(tmp_path):
    return tmp_path / "codes.jsonl"


@pytest.fixture()
def client(store_path):
    app = build_app(residual=RESIDUAL, store_path=store_path, round_size=50)
    with TestClient(app) as c:
        yield c


def _code_everything(client, rater, motive_of):
    coded = {}
    while True:
        nxt = client.get(f"/api/prompts/next?rater={rater}").json()
        if nxt["done"]:
            break
        motive = motive_of(nxt["prompt"])
        response = client.post(
            "/api/codes", json={"rater": rater, "prompt": nxt["prompt"], "motive": motive}
        )
        assert response.status_code == 200, response.text
        coded[nxt["prompt"]] = motive
    return coded


class TestQueue:
    def test_frequency_descending_order(self, client):
        first = client.get("/api/prompts/next?rater=R2").json()
        assert first["prompt"] == "prompt 000"
        assert first["round"] == 1

    def test_round_boundary(self, client):
        for i in range(50):
            client.post(
                "/api/codes",
                json={"rater": "R2", "prompt": f"prompt {i:03d}", "motive": "Search"},
            )
        nxt = client.get("/api/prompts/next?rater=R2").json()
        assert nxt["round"] == 2

    def test_completion(self, client):
        _code_everything(client, "R2", lambda p: "Search")
        assert client.get("/api/prompts/next?rater=R2").json()["done"] is True


class TestCodes:
    def test_invalid_motive_400(self, client):
        response = client.post(
            "/api/codes", json={"rater": "R2", "prompt": "prompt 000", "motive": "Nonsense"}
        )
        assert response.status_code == 400

    def test_fallback_motives_rejected(self, client):
        response = client.post(
            "/api/codes", json={"rater": "R2", "prompt": "prompt 000", "motive": "Unlabeled"}
        )
        assert response.status_code == 400

    def test_invalid_rater_400(self, client):
        response = client.get("/api/prompts/next?rater=bad rater!")
        assert response.status_code == 400

    def test_unknown_prompt_404(self, client):
        response = client.post(
            "/api/codes", json={"rater": "R2", "prompt": "nope", "motive": "Search"}
        )
        assert response.status_code == 404

    def test_duplicate_409_and_amend(self, client):
        body = {"rater": "R2", "prompt": "prompt 000", "motive": "Search"}
        assert client.post("/api/codes", json=body).status_code == 200
        assert client.post("/api/codes", json=body).status_code == 409
        amended = client.post(
            "/api/codes?amend=true",
            json={"rater": "R2", "prompt": "prompt 000", "motive": "Other"},
        )
        assert amended.status_code == 200
        assert amended.json()["version"] == 2

    def test_submission_id_idempotent(self, client):
        body = {
            "rater": "R2",
            "prompt": "prompt 001",
            "motive": "Search",
            "submission_id": "sub-1",
        }
        first = client.post("/api/codes", json=body)
        retry = client.post("/api/codes", json=body)
        assert first.status_code == 200 and retry.status_code == 200
        assert retry.json()["status"] == "duplicate_submission"


class TestAgreement:
    def test_identical_coding_kappa_one(self, client):
        def motive_of(prompt):
            return ASSIGNABLE_MOTIVES[hash(prompt) % 3].value

        _code_everything(client, "R2", motive_of)
        _code_everything(client, "R3", motive_of)
        agreement = client.get("/api/agreement?a=R2&b=R3").json()
        assert agreement["overlap"] is True
        assert agreement["overall"]["kappa"] == pytest.approx(1.0)

    def test_published_disagreement_shape(self, store_path):
        # 438 common prompts, 45 coded differently
        residual = [(f"q{i:04d}", 1000 - i) for i in range(438)]
        app = build_app(residual=residual, store_path=store_path, round_size=50)
        with TestClient(app) as client:
            for i, (prompt, _) in enumerate(residual):
                a = "Messaging" if i % 2 else "Search"
                b = a if i >= 45 else ("Posting" if a == "Messaging" else "Commenting")
                client.post("/api/codes", json={"rater": "R2", "prompt": prompt, "motive": a})
                client.post("/api/codes", json={"rater": "R3", "prompt": prompt, "motive": b})
            agreement = client.get("/api/agreement?a=R2&b=R3").json()
            assert agreement["n"] == 438
            assert agreement["overall"]["po"] == pytest.approx(393 / 438, abs=1e-12)
            items = client.get("/api/disagreements?a=R2&b=R3").json()["items"]
            assert len(items) == 45

    def test_no_overlap_state(self, client):
        client.post("/api/codes", json={"rater": "R2", "prompt": "prompt 000", "motive": "Search"})
        client.post("/api/codes", json={"rater": "R3", "prompt": "prompt 001", "motive": "Search"})
        assert client.get("/api/agreement?a=R2&b=R3").json()["overlap"] is False


class TestExportAndOracleEquivalence:
    def test_service_kappa_equals_offline_module(self, client):
        # S1 (service side): two raters code 50 prompts; the agreement
        # endpoint must equal the offline computation on the exported TSVs.
        def motive_a(prompt):
            return ASSIGNABLE_MOTIVES[hash(prompt) % 5].value

        def motive_b(prompt):
            return ASSIGNABLE_MOTIVES[hash(prompt) % 4].value

        for i in range(50):
            prompt = f"prompt {i:03d}"
            client.post("/api/codes", json={"rater": "R2", "prompt": prompt, "motive": motive_a(prompt)})
            client.post("/api/codes", json={"rater": "R3", "prompt": prompt, "motive": motive_b(prompt)})

        service_kappa = client.get("/api/agreement?a=R2&b=R3").json()["overall"]["kappa"]
        codes_a = mio.parse_rater_codes(client.get("/api/codes/export?rater=R2").text)
        codes_b = mio.parse_rater_codes(client.get("/api/codes/export?rater=R3").text)
        offline = cohen_kappa(confusion_matrix(codes_a, codes_b))
        assert service_kappa == offline.kappa

    def test_export_consensus_and_exclusions(self, client):
        client.post("/api/codes", json={"rater": "R2", "prompt": "prompt 000", "motive": "Search"})
        client.post("/api/codes", json={"rater": "R3", "prompt": "prompt 000", "motive": "Search"})
        client.post("/api/codes", json={"rater": "R2", "prompt": "prompt 001", "motive": "Posting"})
        client.post("/api/codes", json={"rater": "R3", "prompt": "prompt 001", "motive": "Other"})
        mapping = mio.parse_mapping(client.get("/api/mapping/export").text)
        assert mapping.get("prompt 000").motive is Motive.SEARCH
        assert mapping.get("prompt 000").coder == "R2+R3"
        assert mapping.get("prompt 001") is None  # disagreed, unresolved

    def test_resolution_round_trip_and_restart(self, store_path):
        # S2 (service side): a resolution survives a service restart.
        app = build_app(residual=RESIDUAL, store_path=store_path, round_size=50)
        with TestClient(app) as client:
            client.post("/api/codes", json={"rater": "R2", "prompt": "prompt 002", "motive": "Posting"})
            client.post("/api/codes", json={"rater": "R3", "prompt": "prompt 002", "motive": "Other"})
            response = client.post(
                "/api/resolve",
                json={"prompt": "prompt 002", "motive": "Posting", "resolver": "R1"},
            )
            assert response.status_code == 200
            mapping = mio.parse_mapping(client.get("/api/mapping/export").text)
            entry = mapping.get("prompt 002")
            assert entry.motive is Motive.POSTING
            assert entry.provenance.value == "ManualCoded"
            assert entry.round == 3 and entry.coder == "R1"
        app.state.store.close()

        restarted = build_app(residual=RESIDUAL, store_path=store_path, round_size=50)
        with TestClient(restarted) as client:
            mapping = mio.parse_mapping(client.get("/api/mapping/export").text)
            entry = mapping.get("prompt 002")
            assert entry is not None and entry.motive is Motive.POSTING
            resolved = {
                item["prompt"]: item["resolved"]
                for item in client.get("/api/disagreements?a=R2&b=R3").json()["items"]
            }
            assert resolved["prompt 002"] is True

    def test_append_only_amendment_preserves_history(self, client, store_path):
        client.post("/api/codes", json={"rater": "R2", "prompt": "prompt 000", "motive": "Search"})
        client.post(
            "/api/codes?amend=true",
            json={"rater": "R2", "prompt": "prompt 000", "motive": "Other"},
        )
        lines = store_path.read_text().strip().splitlines()
        assert len(lines) == 2  # nothing erased

    def test_store_env_var(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MOTIVELOG_STORE", str(tmp_path / "env-store.jsonl"))
        app = build_app(residual=RESIDUAL)
        assert app.state.store.store_path == tmp_path / "env-store.jsonl"
