import json

import pytest

from databoard.clock import ScriptedClock
from databoard.errors import MentionError, PersistError
from databoard.gateway import ScriptedProvider
from databoard.session import ChatMessage, Session, resolve_mentions

from conftest import table


def make_session(fixtures=None, title="w"):
    provider = ScriptedProvider(fixtures or {})
    session = Session(title, clock=ScriptedClock(1000.0), provider=provider)
    return session, provider


class TestMentions:
    def setup_method(self):
        self.session, _ = make_session()
        self.session.workspace.create_instance(
            table("Table1", [("a", "text")], [["x"]]))
        self.session.workspace.create_instance(
            table("Table2", [("a", "text")], [["y"]]))

    def test_two_mentions_resolve(self):
        mentions, rejections = resolve_mentions(
            "join @Table1 and @Table2", self.session.workspace.current)
        assert mentions == ["Table1", "Table2"]
        assert rejections == []

    def test_ambiguous_prefix_rejected_with_candidates(self):
        mentions, rejections = resolve_mentions(
            "look at @Tab please", self.session.workspace.current)
        assert mentions == []
        assert rejections == [{"token": "Tab",
                               "candidates": ["Table1", "Table2"]}]

    def test_no_at_sign_no_mentions(self):
        mentions, rejections = resolve_mentions(
            "nothing here", self.session.workspace.current)
        assert mentions == [] and rejections == []

    def test_longest_match_wins(self):
        self.session.workspace.create_instance(
            table("Table10", [("a", "text")], [["z"]]))
        mentions, _ = resolve_mentions("see @Table10",
                                       self.session.workspace.current)
        assert mentions == ["Table10"]


class TestHandleChat:
    def test_scripted_plan_executes_and_reports_steps(self):
        fixtures = {"by_intent": {
            "sort @T ascending": {
                "response": '[{"tool": "tableSort", "args": {"instanceId": "T",'
                            ' "columnName": "n", "order": "asc"}}]',
                "description": "Sorted the table."}}}
        session, _ = make_session(fixtures)
        session.workspace.create_instance(
            table("T", [("n", "number")], [[2.0], [1.0]]))
        message = session.handle_chat("sort @T ascending")
        assert message.role == "assistant"
        assert message.error is None
        assert "Step 1: tableSort(" in message.text
        got = [c.value for c in
               session.workspace.current.instance("T").column_cells("n")]
        assert got == [1.0, 2.0]

    def test_unresolved_mention_raises_with_candidates(self):
        session, _ = make_session()
        session.workspace.create_instance(table("Table1", [("a", "text")], []))
        session.workspace.create_instance(table("Table2", [("a", "text")], []))
        with pytest.raises(MentionError) as info:
            session.handle_chat("use @Tab")
        assert info.value.candidates == ["Table1", "Table2"]

    def test_chat_clears_peripheral_suggestions(self):
        fixtures = {"by_intent": {"hello there": {
            "response": '[{"tool": "openPage", "args": {"url": "https://x"}}]'}}}
        session, _ = make_session(fixtures)
        session.workspace.create_instance(
            table("A", [("k", "text")], [["p"]]))
        session.workspace.create_instance(
            table("B", [("k", "text")], [["p"]]))
        session.clock.advance(6000)
        session.tick()
        assert session.guidance.peripheral_order    # joining suggestion offered
        session.handle_chat("hello there")
        assert session.guidance.peripheral_order == []

    def test_failing_plan_rolls_back_and_reports(self):
        fixtures = {"by_intent": {"break it": {
            "response": '[{"tool": "tableSort", "args": {"instanceId": "T", '
                        '"columnName": "n", "order": "asc"}},'
                        ' {"tool": "tableSort", "args": {"instanceId": "T", '
                        '"columnName": "gone", "order": "asc"}}]'}}}
        session, _ = make_session(fixtures)
        session.workspace.create_instance(
            table("T", [("n", "number")], [[2.0], [1.0]]))
        before = session.workspace.serialize()
        message = session.handle_chat("break it")
        assert message.error is not None
        assert session.workspace.serialize() == before

    def test_unparseable_responses_surface_after_retries(self):
        fixtures = {"by_intent": {"gibberish": {"response": "no plan here"}}}
        session, _ = make_session(fixtures)
        message = session.handle_chat("gibberish")
        assert message.error == "parse-error"


class TestPersistence:
    def test_empty_session_round_trip(self, tmp_path):
        session, _ = make_session()
        path = tmp_path / "s.json"
        session.persist(path)
        restored = Session.restore(path, clock=ScriptedClock(1000.0))
        assert restored.workspace.serialize() == session.workspace.serialize()

    def test_full_session_round_trip_hash_equal(self, tmp_path):
        fixtures = {"by_intent": {"note this": {
            "response": '[{"tool": "openPage", "args": {"url": "https://x"}}]'}}}
        session, _ = make_session(fixtures)
        session.workspace.create_instance(
            table("T", [("n", "number")], [[2.0], [1.0]]))
        page = "<html><body><p class='x'>hi</p></body></html>"
        session.ingest(page, "https://x.test/p")
        session.record_event("table-created", {"instance_id": "T"})
        session.handle_chat("note this")
        path = tmp_path / "s.json"
        session.persist(path)
        restored = Session.restore(path, clock=ScriptedClock(9999.0))
        assert restored.workspace.state_hash() == session.workspace.state_hash()
        assert [m.to_json() for m in restored.chat_log] == \
            [m.to_json() for m in session.chat_log]
        assert len(restored.guidance.log.all_events()) == \
            len(session.guidance.log.all_events())
        # persist(restore(persist(s))) is byte-identical
        second = tmp_path / "s2.json"
        restored.persist(second)
        assert second.read_text() == path.read_text()

    def test_corrupted_file_structured_error(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        with pytest.raises(PersistError):
            Session.restore(path)
        path.write_text(json.dumps({"magic": "something-else"}))
        with pytest.raises(PersistError):
            Session.restore(path)
        path.write_text(json.dumps({"magic": "databoard-session",
                                    "schema_version": 99}))
        with pytest.raises(PersistError):
            Session.restore(path)


class TestChatMessageModel:
    def test_round_trip(self):
        message = ChatMessage("assistant", "done", ["T"], {"steps": []}, 4, None)
        assert ChatMessage.from_json(message.to_json()).to_json() == message.to_json()
