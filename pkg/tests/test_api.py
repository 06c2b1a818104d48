import json
import threading

import pytest

from careercoach.career_tree import RoleMapping, recommend_paths
from careercoach.coach import (QATranscript, build_chat_request,
                               build_summary_request, greeting_turn)
from careercoach.gateway import request_fingerprint
from careercoach.ingest import ParsedResume, chunk_text, build_extraction_request
from careercoach.skills import assess

from tests.conftest import (FIXTURE_QUESTIONS, KUBERNETES_PROMOTION_ANSWER,
                            PARSED_RESUME, RESUME_TEXT, canonical)

PHOTOGRAPHER_TEXT = """Casey Morgan

EXPERIENCE

Marine Wildlife Photographer - Ocean Zine (2019 - 2024)
- Photographed whales from kayaks.
"""

PHOTOGRAPHER_PARSED = {
    "name": "Casey Morgan",
    "contacts": [], "education": [],
    "experience": [
        {"title": "Marine Wildlife Photographer", "organization": "Ocean Zine",
         "start": "2019", "end": "2024",
         "bullets": ["Photographed whales from kayaks."]}],
    "technical_skills": [{"name": "photography", "context_snippets": []}],
    "soft_skills": [], "certifications": [], "projects": [],
}


def extraction_stub(text, parsed, templates):
    chunks = chunk_text(text)
    assert len(chunks) == 1
    request = build_extraction_request(chunks[0], templates)
    return {request_fingerprint(request): [json.dumps(parsed)]}


def create_profile(client, name="Jordan"):
    response = client.post("/v1/profiles", json={"display_name": name})
    assert response.status_code == 201
    return response.json()["profile_id"]


def upload_resume(client, profile_id, text=RESUME_TEXT, filename="resume.txt"):
    return client.post(f"/v1/profiles/{profile_id}/resume",
                       files={"file": (filename, text.encode(), "text/plain")})


def expected_report(tree, skills_store, qa=None, profile_id="p-000001"):
    mapping = RoleMapping("software-engineer-ii", 0.0, "", "")
    immediate, _ = recommend_paths(mapping, tree)
    return assess(profile_id, ParsedResume.from_dict(PARSED_RESUME),
                  qa or QATranscript("s"), mapping, immediate, skills_store)


class TestProfiles:
    def test_create_returns_fresh_id(self, client):
        assert create_profile(client, "Jane") == "p-000001"

    def test_empty_body_is_400(self, client):
        response = client.post("/v1/profiles", json={})
        assert response.status_code == 400
        assert response.json()["error"]["code"] == "invalid_body"

    def test_duplicate_display_names_get_distinct_ids(self, client):
        a = create_profile(client, "Jane")
        b = create_profile(client, "Jane")
        assert a != b


class TestResumeUpload:
    def test_full_bundle(self, client):
        profile_id = create_profile(client)
        response = upload_resume(client, profile_id)
        assert response.status_code == 200
        bundle = response.json()
        assert bundle["parsed"]["name"] == "Jordan Rivera"
        assert bundle["mapping"]["node_id"] == "software-engineer-ii"
        gaps = bundle["report"]["gaps"]
        assert [(g["skill_name"], g["severity"]) for g in gaps] == [
            ("system design", 3), ("mentoring", 2), ("kubernetes", 1)]
        assert len(bundle["recommendations"]["courses"]) == 5
        assert bundle["recommendations"]["query_text"] == (
            "Skills and technologies required for Senior Software Engineer: "
            "system design (advanced), mentoring (intermediate), "
            "kubernetes (intermediate)")

    def test_bundle_is_byte_stable_across_fresh_runs(self, make_client):
        payloads = []
        for _ in range(2):
            client = make_client()
            profile_id = create_profile(client)
            payloads.append(canonical(upload_resume(client, profile_id).json()))
        assert payloads[0] == payloads[1]

    def test_empty_file_is_422(self, client):
        profile_id = create_profile(client)
        response = client.post(f"/v1/profiles/{profile_id}/resume",
                               files={"file": ("cv.txt", b"", "text/plain")})
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "empty_document"

    def test_unknown_profile_is_404(self, client):
        response = upload_resume(client, "p-424242")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_profile"

    def test_unmappable_resume_is_409_with_qa_fallback(self, make_client,
                                                       templates):
        client = make_client(extraction_stub(PHOTOGRAPHER_TEXT,
                                             PHOTOGRAPHER_PARSED, templates))
        profile_id = create_profile(client, "Casey")
        response = upload_resume(client, profile_id, PHOTOGRAPHER_TEXT)
        assert response.status_code == 409
        error = response.json()["error"]
        assert error["code"] == "unmappable_role"
        assert error["detail"]["fallback"]["qa_endpoint"].endswith("/qa")
        # parsed resume persisted; generic questionnaire is the fallback
        questions = client.get(f"/v1/profiles/{profile_id}/qa").json()["questions"]
        assert questions and all(q["role_node_id"] == "" for q in questions)

    def test_oversized_upload_is_413(self, make_client, templates, tree,
                                     skills_store, embedder, collection):
        from careercoach.api import create_app
        from careercoach.gateway import LlmGateway, StubProvider
        from careercoach.pipeline import Pipeline
        from careercoach.store import ProfileStore
        from fastapi.testclient import TestClient
        import tempfile
        gateway = LlmGateway()
        gateway.register_provider("stub", StubProvider({}))
        pipeline = Pipeline(gateway=gateway, embedder=embedder, tree=tree,
                            skills_store=skills_store, collection=collection,
                            templates=templates)
        with tempfile.TemporaryDirectory() as tmp:
            store = ProfileStore(tmp, pipeline=pipeline)
            client = TestClient(create_app(pipeline, store, upload_limit_bytes=64),
                                raise_server_exceptions=False)
            profile_id = create_profile(client)
            response = upload_resume(client, profile_id, "x" * 100)
            assert response.status_code == 413
            assert response.json()["error"]["code"] == "upload_too_large"


class TestCareerPath:
    def test_mapped_profile_lists_fixture_edges(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        payload = client.get(f"/v1/profiles/{profile_id}/career-path").json()
        assert payload["current_node"]["node_id"] == "software-engineer-ii"
        assert [n["node_id"] for n in payload["immediate"]] == \
            ["senior-software-engineer"]
        assert [n["node_id"] for n in payload["advanced"]] == \
            ["staff-software-engineer", "engineering-manager"]

    def test_unmapped_profile_is_409(self, client):
        profile_id = create_profile(client)
        response = client.get(f"/v1/profiles/{profile_id}/career-path")
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "no_mapping_yet"

    def test_leaf_node_gives_empty_lists(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        client.get(f"/v1/profiles/{profile_id}/qa")
        response = client.post(
            f"/v1/profiles/{profile_id}/qa",
            json={"question_id": "q1", "answer": "Principal Software Engineer"})
        assert response.status_code == 200
        payload = client.get(f"/v1/profiles/{profile_id}/career-path").json()
        assert payload["current_node"]["node_id"] == "principal-software-engineer"
        assert payload["immediate"] == [] and payload["advanced"] == []


class TestQaAndRecalibration:
    def test_questions_generated_for_mapped_profile(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        payload = client.get(f"/v1/profiles/{profile_id}/qa").json()
        assert [q["text"] for q in payload["questions"]] == \
            [q["text"] for q in FIXTURE_QUESTIONS]
        assert all(q["role_node_id"] == "software-engineer-ii"
                   for q in payload["questions"])

    def test_answer_recalibrates_report_and_recommendations(self, client, tree,
                                                            skills_store):
        profile_id = create_profile(client)
        before = upload_resume(client, profile_id).json()
        client.get(f"/v1/profiles/{profile_id}/qa")
        response = client.post(
            f"/v1/profiles/{profile_id}/qa",
            json={"question_id": "q3", "answer": KUBERNETES_PROMOTION_ANSWER})
        assert response.status_code == 200
        after = response.json()

        before_gaps = {g["skill_name"] for g in before["report"]["gaps"]}
        after_gaps = {g["skill_name"] for g in after["report"]["gaps"]}
        assert before_gaps - after_gaps == {"kubernetes"}
        assert len(before_gaps) - len(after_gaps) == 1
        assert after["recommendations"]["query_text"] == (
            "Skills and technologies required for Senior Software Engineer: "
            "system design (advanced), mentoring (intermediate)")

        refetched = client.get(f"/v1/profiles/{profile_id}/recommendations").json()
        assert refetched["query_text"] == after["recommendations"]["query_text"]

    def test_answer_to_unknown_question_is_404(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        client.get(f"/v1/profiles/{profile_id}/qa")
        response = client.post(f"/v1/profiles/{profile_id}/qa",
                               json={"question_id": "q99", "answer": "hm"})
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_question"

    def test_recalibration_is_idempotent_for_identical_answers(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        client.get(f"/v1/profiles/{profile_id}/qa")
        url = f"/v1/profiles/{profile_id}/qa"
        body = {"question_id": "q3", "answer": KUBERNETES_PROMOTION_ANSWER}
        first = client.post(url, json=body).json()
        second = client.post(url, json=body).json()
        assert canonical(first["report"]) == canonical(second["report"])
        assert canonical(first["recommendations"]) == \
            canonical(second["recommendations"])
        # audit trail still advanced
        revisions = [e["revision"] for e in second["qa"]["entries"]
                     if e["question"]["question_id"] == "q3"]
        assert revisions == [0, 1]

    def test_revision_history_preserved(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        client.get(f"/v1/profiles/{profile_id}/qa")
        for answer in ("first answer", "second answer"):
            client.post(f"/v1/profiles/{profile_id}/qa",
                        json={"question_id": "q5", "answer": answer})
        payload = client.get(f"/v1/profiles/{profile_id}/qa").json()
        entries = [e for e in payload["entries"]
                   if e["question"]["question_id"] == "q5"]
        assert [e["revision"] for e in entries] == [0, 1]


class TestSkillReportAndRecommendations:
    def test_skill_report_before_upload_is_409(self, client):
        profile_id = create_profile(client)
        response = client.get(f"/v1/profiles/{profile_id}/skill-report")
        assert response.status_code == 409

    def test_recommendations_include_tracker(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        payload = client.get(f"/v1/profiles/{profile_id}/recommendations").json()
        assert len(payload["courses"]) == 5
        tracked = {e["course_id"] for e in payload["course_tracker"]}
        assert {c["course"]["course_id"] for c in payload["courses"]} <= tracked
        assert all(e["status"] == "recommended" for e in payload["course_tracker"])


class TestChatAndSummary:
    def chat_stub(self, templates, tree, skills_store, reply_text):
        report = expected_report(tree, skills_store)
        resume = ParsedResume.from_dict(PARSED_RESUME)
        mapping = RoleMapping("software-engineer-ii", 0.0, "", "")
        history = [greeting_turn("Jordan", templates)]
        request = build_chat_request("Jordan", resume, mapping, report, tree,
                                     history, "What should I learn first?",
                                     templates)
        return {request_fingerprint(request): [json.dumps({"text": reply_text})]}

    def test_chat_round_trip(self, make_client, templates, tree, skills_store):
        client = make_client(self.chat_stub(
            templates, tree, skills_store,
            "Start with the system design course, then kubernetes."))
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        response = client.post(f"/v1/profiles/{profile_id}/chat",
                               json={"text": "What should I learn first?"})
        assert response.status_code == 200
        assert response.json()["turn"]["speaker"] == "coach"
        profile = client.get(f"/v1/profiles/{profile_id}").json()
        speakers = [t["speaker"] for t in profile["chat"]]
        assert speakers == ["coach", "candidate", "coach"]  # greeting first

    def test_empty_chat_text_is_422(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        response = client.post(f"/v1/profiles/{profile_id}/chat",
                               json={"text": "   "})
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "empty_text"

    def summary_stub(self, templates, tree, skills_store, gaps):
        report = expected_report(tree, skills_store)
        mapping = RoleMapping("software-engineer-ii", 0.0, "", "")
        request = build_summary_request(report, mapping, tree, templates)
        payload = {"strengths": ["Python"], "gaps_highlighted": gaps,
                   "improvement_areas": ["Design practice"],
                   "motivational_note": "Keep going.",
                   "next_steps": ["Take a course"]}
        return {request_fingerprint(request): [json.dumps(payload)]}

    def test_summary_grounding_drops_fabricated_gap(self, make_client, templates,
                                                    tree, skills_store):
        report = expected_report(tree, skills_store)
        fabricated = report.gap_names() + ["underwater basket weaving"]
        client = make_client(self.summary_stub(templates, tree, skills_store,
                                               fabricated))
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        summary = client.get(f"/v1/profiles/{profile_id}/summary").json()
        assert summary["gaps_highlighted"] == report.gap_names()


class TestCourseTrackerEndpoint:
    def test_status_transitions(self, client):
        profile_id = create_profile(client)
        bundle = upload_resume(client, profile_id).json()
        course_id = bundle["recommendations"]["courses"][0]["course"]["course_id"]
        url = f"/v1/profiles/{profile_id}/courses/{course_id}/status"
        assert client.put(url, json={"status": "completed"}).status_code == 200
        response = client.put(url, json={"status": "in_progress"})
        assert response.status_code == 409
        assert response.json()["error"]["code"] == "illegal_transition"

    def test_unknown_course_is_404(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        response = client.put(
            f"/v1/profiles/{profile_id}/courses/course-nope/status",
            json={"status": "completed"})
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "unknown_course"

    def test_invalid_status_value_is_400(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        response = client.put(
            f"/v1/profiles/{profile_id}/courses/course-x/status",
            json={"status": "abandoned"})
        assert response.status_code == 400


class TestErrorDiscipline:
    def test_malformed_bodies_never_give_uncoded_500(self, client):
        profile_id = create_profile(client)
        attempts = [
            client.post("/v1/profiles", content=b"{not json",
                        headers={"content-type": "application/json"}),
            client.post("/v1/profiles", json={"display_name": 42}),
            client.post(f"/v1/profiles/{profile_id}/qa", json={"answer": "x"}),
            client.post(f"/v1/profiles/{profile_id}/chat", json={}),
            client.put(f"/v1/profiles/{profile_id}/courses/c/status", json={}),
            client.post("/v1/profiles", json={"display_name": "  "}),
        ]
        for response in attempts:
            assert response.status_code < 500
            assert "code" in response.json()["error"]

    def test_unknown_route_still_coded(self, client):
        response = client.get("/v1/definitely-not-a-route")
        assert response.json()["error"]["code"] == "not_found"

    def test_provider_failure_maps_to_502(self, make_client):
        # no extraction stub for this text: the provider has no script entry
        client = make_client()
        profile_id = create_profile(client)
        response = upload_resume(client, profile_id, "Totally unscripted resume")
        assert response.status_code == 502
        assert response.json()["error"]["code"] == "provider_unavailable"


class TestConcurrency:
    def test_parallel_answers_on_one_profile_lose_nothing(self, client):
        profile_id = create_profile(client)
        upload_resume(client, profile_id)
        client.get(f"/v1/profiles/{profile_id}/qa")
        statuses = []

        def answer(i):
            response = client.post(
                f"/v1/profiles/{profile_id}/qa",
                json={"question_id": "q5", "answer": f"answer {i}"})
            statuses.append(response.status_code)

        threads = [threading.Thread(target=answer, args=(i,)) for i in range(4)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert statuses == [200] * 4
        payload = client.get(f"/v1/profiles/{profile_id}/qa").json()
        entries = [e for e in payload["entries"]
                   if e["question"]["question_id"] == "q5"]
        assert sorted(e["revision"] for e in entries) == [0, 1, 2, 3]

    def test_distinct_profiles_progress_independently(self, client):
        ids = [create_profile(client, f"P{i}") for i in range(3)]
        results = {}

        def run(profile_id):
            results[profile_id] = upload_resume(client, profile_id).status_code

        threads = [threading.Thread(target=run, args=(pid,)) for pid in ids]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert set(results.values()) == {200}
