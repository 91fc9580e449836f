#include "kg/llm.hpp"

#include <doctest.h>
#include <httplib.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <thread>

using namespace kg;

TEST_CASE("scripted client plays back its queue") {
    ScriptedChatClient mock({"hello"});
    ChatRequest request{{{ChatRole::user, "hi"}}};
    CHECK(mock.complete(request) == "hello");
    CHECK(mock.calls_made() == 1);

    // exhaustion names the call index
    CHECK_THROWS_WITH_AS(mock.complete(request), doctest::Contains("call 1"), Error);
}

TEST_CASE("request validation") {
    ScriptedChatClient mock({"x"});
    CHECK_THROWS_AS(mock.complete(ChatRequest{}), Error); // no messages
    CHECK_THROWS_AS(mock.complete(ChatRequest{{{ChatRole::system, "only system"}}}), Error);
    CHECK_THROWS_AS(mock.complete(ChatRequest{{{ChatRole::user, ""}}}), Error);
    ChatRequest misplaced{{{ChatRole::user, "a"}, {ChatRole::system, "late"}}};
    CHECK_THROWS_AS(mock.complete(misplaced), Error);
    CHECK(mock.remaining() == 1); // nothing consumed by invalid requests
}

TEST_CASE("scripted file round trip and request capture") {
    auto path = std::filesystem::temp_directory_path() / "kg_script_test.json";
    {
        std::ofstream out(path);
        out << R"(["first", "second"])";
    }
    ScriptedChatClient mock = ScriptedChatClient::from_file(path);
    ChatRequest request{{{ChatRole::system, "sys"}, {ChatRole::user, "one"}}};
    CHECK(mock.complete(request) == "first");
    REQUIRE(mock.captured_requests().size() == 1);
    CHECK(mock.captured_requests()[0].messages[1].content == "one");
    std::filesystem::remove(path);
}

TEST_CASE("audit log records request and response") {
    auto path = std::filesystem::temp_directory_path() / "kg_audit_test.jsonl";
    std::filesystem::remove(path);
    ScriptedChatClient mock({"answer"});
    mock.set_audit_log(path);
    mock.complete(ChatRequest{{{ChatRole::user, "question"}}});
    std::ifstream in(path);
    std::string line;
    REQUIRE(std::getline(in, line));
    auto parsed = nlohmann::json::parse(line);
    CHECK(parsed["response"] == "answer");
    CHECK(parsed["request"]["messages"][0]["content"] == "question");
    std::filesystem::remove(path);
}

TEST_CASE("duet with zero rounds is a single exchange") {
    ScriptedChatClient mock({"the answer"});
    AgentPersona asker{"chef", "You are a chef."};
    AgentPersona responder{"engineer", "You are a creative engineer."};
    Transcript t = run_agent_duet("how to combine?", asker, responder, 0, mock);
    REQUIRE(t.turns.size() == 1);
    CHECK(t.turns[0].question == "how to combine?");
    CHECK(t.turns[0].answer == "the answer");
    CHECK(mock.calls_made() == 1);
}

TEST_CASE("duet interleaves the scripted outputs in exact order") {
    const int rounds = 3;
    std::vector<std::string> script;
    script.push_back("answer0");
    for (int i = 1; i <= rounds; ++i) {
        script.push_back("question" + std::to_string(i));
        script.push_back("answer" + std::to_string(i));
    }
    ScriptedChatClient mock(script);
    AgentPersona asker{"chef", "You are a chef."};
    AgentPersona responder{"engineer", "You are a creative engineer."};
    Transcript t = run_agent_duet("q0", asker, responder, rounds, mock);

    // exact completion budget: one initial answer, then two per round
    CHECK(mock.calls_made() == 2 * rounds + 1);
    CHECK(mock.remaining() == 0);
    REQUIRE(t.turns.size() == rounds + 1);
    CHECK(t.turns[0].question == "q0");
    CHECK(t.turns[0].answer == "answer0");
    for (int i = 1; i <= rounds; ++i) {
        CHECK(t.turns[i].question == "question" + std::to_string(i));
        CHECK(t.turns[i].answer == "answer" + std::to_string(i));
    }

    // the asker saw the follow-up instruction, verbatim
    bool saw_follow_up = false;
    for (const auto& request : mock.captured_requests()) {
        for (const auto& message : request.messages) {
            if (message.content.find("Respond with a SINGLE follow-up question that critically "
                                     "challenges the response") != std::string::npos)
                saw_follow_up = true;
        }
    }
    CHECK(saw_follow_up);

    // responder requests carry the full prior transcript
    const auto& last_responder = mock.captured_requests().back();
    CHECK(last_responder.messages.size() == 2 * rounds + 2); // system + history + question
}

TEST_CASE("duet failure carries the partial transcript") {
    ScriptedChatClient mock({"answer0", "question1"}); // dries up mid-round
    AgentPersona asker{"a", "ask"};
    AgentPersona responder{"r", "respond"};
    try {
        run_agent_duet("q0", asker, responder, 2, mock);
        FAIL("expected DuetError");
    } catch (const DuetError& e) {
        CHECK(e.partial_transcript().turns.size() == 1);
        CHECK(e.partial_transcript().turns[0].answer == "answer0");
    }
}

TEST_CASE("summarize_transcript fills the three fields in order") {
    Transcript t;
    t.turns.push_back({"why?", "because."});
    ScriptedChatClient mock({"the summary", "- point", "the takeaway"});
    summarize_transcript(t, mock);
    CHECK(t.summary == "the summary");
    CHECK(t.key_points == "- point");
    CHECK(t.takeaway == "the takeaway");

    // summary prompt text is the scripted one
    CHECK(mock.captured_requests()[0].messages[0].content.find(
              "Accurately summarize the conversation and identify the key points") !=
          std::string::npos);
    CHECK(mock.captured_requests()[2].messages[0].content.find(
              "Identify the single most important takeaway") != std::string::npos);

    // block ordering in the concatenated export
    std::string text = t.concatenated();
    CHECK(text.find("the summary") < text.find("- point"));
    CHECK(text.find("- point") < text.find("the takeaway"));

    Transcript empty;
    CHECK_THROWS_AS(summarize_transcript(empty, mock), Error);

    // a failed completion leaves the transcript unmodified
    Transcript t2;
    t2.turns.push_back({"q", "a"});
    ScriptedChatClient dry({"only one"});
    CHECK_THROWS_AS(summarize_transcript(t2, dry), Error);
    CHECK(t2.summary.empty());
}

TEST_CASE("transcript serialization is loss-free") {
    Transcript t;
    t.asker_name = "chef";
    t.responder_name = "engineer";
    t.turns = {{"q0", "a0"}, {"q1 with \"quotes\"", "a1\nmultiline"}};
    t.summary = "s";
    t.key_points = "k";
    t.takeaway = "t";

    Transcript back = transcript_from_json(transcript_to_json(t));
    CHECK(back.asker_name == t.asker_name);
    CHECK(back.responder_name == t.responder_name);
    REQUIRE(back.turns.size() == t.turns.size());
    for (std::size_t i = 0; i < t.turns.size(); ++i) {
        CHECK(back.turns[i].question == t.turns[i].question);
        CHECK(back.turns[i].answer == t.turns[i].answer);
    }
    CHECK(back.summary == t.summary);
    CHECK(back.key_points == t.key_points);
    CHECK(back.takeaway == t.takeaway);

    std::string text = transcript_to_text(t);
    CHECK(text.find("Asker: q0") != std::string::npos);
    CHECK(text.find("Responder: a0") != std::string::npos);
}

TEST_CASE("http chat client speaks the chat-completions protocol") {
    httplib::Server server;
    server.Post("/v1/chat/completions", [](const httplib::Request& req, httplib::Response& res) {
        auto body = nlohmann::json::parse(req.body);
        REQUIRE(body["model"] == "test-model");
        REQUIRE(body["messages"].size() == 2);
        nlohmann::json payload = {
            {"choices", {{{"message", {{"role", "assistant"}, {"content", "pong"}}}}}}};
        res.set_content(payload.dump(), "application/json");
    });
    server.Post("/v1/fail/chat/completions", [](const httplib::Request&, httplib::Response& res) {
        res.status = 500;
        res.set_content("{\"error\": \"boom\"}", "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread worker([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
    std::string base = "http://127.0.0.1:" + std::to_string(port);

    HttpChatClient client({base + "/v1", "test-model", "", 10});
    ChatRequest request{{{ChatRole::system, "sys"}, {ChatRole::user, "ping"}}};
    CHECK(client.complete(request) == "pong");

    HttpChatClient failing({base + "/v1/fail", "test-model", "", 10});
    try {
        failing.complete(request);
        FAIL("expected ProviderError");
    } catch (const ProviderError& e) {
        CHECK(e.status() == 500);
    }

    server.stop();
    worker.join();

    // transport errors are retried, then surfaced
    HttpChatClient unreachable({"http://127.0.0.1:1/v1", "m", "", 1});
    unreachable.set_retry_backoff_ms(1);
    CHECK_THROWS_AS(unreachable.complete(request), TransportError);
}
