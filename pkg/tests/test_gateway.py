import json
import random
import string

import jsonschema
import pytest

from careercoach.errors import (DuplicateProvider, ProviderUnavailable,
                                SchemaViolation)
from careercoach.gateway import (REPAIR_PROMPT, LlmGateway, LlmRequest, Message,
                                 StubProvider, estimate_tokens,
                                 request_fingerprint, strip_unknown_fields)

NAME_SCHEMA = {"type": "object", "properties": {"name": {"type": "string"}},
               "required": ["name"]}


def make_request(user_text="hello", schema=NAME_SCHEMA):
    return LlmRequest(
        messages=(Message("system", "You return JSON."), Message("user", user_text)),
        output_schema=schema,
    )


def scripted_gateway(responses, request, retry_limit=2):
    gateway = LlmGateway(retry_limit=retry_limit)
    gateway.register_provider(
        "stub", StubProvider({request_fingerprint(request): responses}))
    return gateway


class TestEstimateTokens:
    def test_empty_string(self):
        assert estimate_tokens("") == 0

    def test_hello_world_is_three(self):
        # ceil(11 bytes / 4)
        assert estimate_tokens("hello world") == 3

    def test_monotone_under_concatenation(self):
        rng = random.Random(7)
        for _ in range(200):
            a = "".join(rng.choices(string.printable + "é日", k=rng.randint(0, 40)))
            b = "".join(rng.choices(string.printable + "é日", k=rng.randint(0, 40)))
            assert estimate_tokens(a + b) >= max(estimate_tokens(a), estimate_tokens(b))
            assert estimate_tokens(a + a) >= estimate_tokens(a)

    def test_pure_function(self):
        rng = random.Random(11)
        for _ in range(10_000):
            s = "".join(rng.choices(string.ascii_letters + " é", k=rng.randint(0, 30)))
            assert estimate_tokens(s) == estimate_tokens(s)


class TestRequestValidation:
    def test_requires_messages(self):
        with pytest.raises(ValueError):
            LlmRequest(messages=(), output_schema=NAME_SCHEMA)

    def test_first_message_must_be_system(self):
        with pytest.raises(ValueError):
            LlmRequest(messages=(Message("user", "hi"),), output_schema=NAME_SCHEMA)

    def test_temperature_range(self):
        with pytest.raises(ValueError):
            make_request().__class__(
                messages=(Message("system", "s"),), output_schema=NAME_SCHEMA,
                temperature=1.5)

    def test_bad_schema_rejected(self):
        with pytest.raises(jsonschema.SchemaError):
            LlmRequest(messages=(Message("system", "s"),),
                       output_schema={"type": "not-a-type"})

    def test_unknown_role_rejected(self):
        with pytest.raises(ValueError):
            Message("narrator", "hi")


class TestCompleteStructured:
    def test_valid_first_try(self):
        request = make_request()
        gateway = scripted_gateway(['{"name": "Ada"}'], request)
        exchange = gateway.complete_structured(request)
        assert exchange.parsed == {"name": "Ada"}
        assert exchange.attempts == 1
        assert exchange.raw_responses == ['{"name": "Ada"}']
        assert exchange.provider_id == "stub"

    def test_malformed_then_valid_takes_two_attempts(self):
        request = make_request()
        gateway = scripted_gateway(["not json {", '{"name": "Ada"}'], request)
        exchange = gateway.complete_structured(request)
        assert exchange.attempts == 2
        assert len(exchange.raw_responses) == 2
        assert exchange.parsed == {"name": "Ada"}

    def test_always_malformed_exhausts_retries(self):
        request = make_request()
        gateway = scripted_gateway(["garbage"], request, retry_limit=2)
        with pytest.raises(SchemaViolation) as err:
            gateway.complete_structured(request)
        assert err.value.detail["attempts"] == 3  # 1 + retry_limit
        assert err.value.detail["last_raw"] == "garbage"

    def test_extra_fields_are_stripped(self):
        request = make_request()
        gateway = scripted_gateway(
            ['{"name": "Ada", "commentary": "so good"}'], request)
        exchange = gateway.complete_structured(request)
        assert exchange.parsed == {"name": "Ada"}

    def test_schema_invalid_payload_retries(self):
        request = make_request()
        gateway = scripted_gateway(['{"wrong": 1}', '{"name": "Ada"}'], request)
        exchange = gateway.complete_structured(request)
        assert exchange.attempts == 2

    def test_parsed_validates_against_request_schema(self):
        request = make_request()
        gateway = scripted_gateway(['{"name": "Ada"}'], request)
        exchange = gateway.complete_structured(request)
        jsonschema.validate(exchange.parsed, dict(exchange.request.output_schema))

    def test_unscripted_request_raises_provider_unavailable(self):
        gateway = scripted_gateway(['{"name": "Ada"}'], make_request("known"))
        with pytest.raises(ProviderUnavailable):
            gateway.complete_structured(make_request("unknown"))

    def test_no_provider_registered(self):
        with pytest.raises(ProviderUnavailable):
            LlmGateway().complete_structured(make_request())

    def test_stub_replay_is_byte_identical(self):
        request = make_request()
        script = {request_fingerprint(request): ["bad", '{"name": "Ada"}']}
        exchanges = []
        for _ in range(2):
            gateway = LlmGateway()
            gateway.register_provider("stub", StubProvider(script))
            exchanges.append(gateway.complete_structured(request))
        assert exchanges[0].raw_responses == exchanges[1].raw_responses
        assert exchanges[0].parsed == exchanges[1].parsed
        assert exchanges[0].attempts == exchanges[1].attempts


class TestRepairConversation:
    def test_repair_prompt_appended_between_attempts(self):
        request = make_request()
        seen = []

        class Recorder:
            def complete(self, req, conversation, attempt):
                seen.append([m.text for m in conversation])
                return "nope" if attempt == 1 else '{"name": "Ada"}'

        gateway = LlmGateway()
        gateway.register_provider("recorder", Recorder())
        gateway.complete_structured(request)
        assert len(seen) == 2
        assert seen[1][-1] == REPAIR_PROMPT
        assert seen[1][-2] == "nope"


class TestProviderRegistry:
    def test_duplicate_id_rejected(self):
        gateway = LlmGateway()
        gateway.register_provider("stub", StubProvider({}))
        with pytest.raises(DuplicateProvider):
            gateway.register_provider("stub", StubProvider({}))

    def test_latest_registration_becomes_active(self):
        request = make_request()
        gateway = LlmGateway()
        gateway.register_provider(
            "first", StubProvider({request_fingerprint(request): ['{"name": "A"}']}))
        gateway.register_provider(
            "second", StubProvider({request_fingerprint(request): ['{"name": "B"}']}))
        exchange = gateway.complete_structured(request)
        assert exchange.provider_id == "second"
        assert exchange.parsed == {"name": "B"}


class TestStripUnknownFields:
    def test_nested_objects_and_arrays(self):
        schema = {
            "type": "object",
            "properties": {
                "items": {"type": "array", "items": {
                    "type": "object",
                    "properties": {"keep": {"type": "string"}}}},
            },
        }
        value = {"items": [{"keep": "x", "drop": 1}], "extra": True}
        assert strip_unknown_fields(value, schema) == {"items": [{"keep": "x"}]}

    def test_additional_properties_true_keeps_extras(self):
        schema = {"type": "object", "properties": {"a": {}},
                  "additionalProperties": True}
        assert strip_unknown_fields({"a": 1, "b": 2}, schema) == {"a": 1, "b": 2}

    def test_fingerprint_depends_only_on_message_texts(self):
        a = make_request("same")
        b = LlmRequest(messages=(Message("system", "You return JSON."),
                                 Message("user", "same")),
                       output_schema={"type": "object"}, temperature=0.9)
        assert request_fingerprint(a) == request_fingerprint(b)
