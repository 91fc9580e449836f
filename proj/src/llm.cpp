#include "kg/llm.hpp"

#include "http_util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <condition_variable>
#include <fstream>
#include <thread>

namespace kg {

namespace {

const char* role_name(ChatRole role) {
    switch (role) {
        case ChatRole::system: return "system";
        case ChatRole::user: return "user";
        case ChatRole::assistant: return "assistant";
    }
    return "user";
}

// process-wide bound on in-flight completions
class Semaphore {
public:
    void set_limit(int limit) {
        std::lock_guard lock(mutex_);
        limit_ = limit;
        cv_.notify_all();
    }
    void acquire() {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [&] { return in_flight_ < limit_; });
        ++in_flight_;
    }
    void release() {
        std::lock_guard lock(mutex_);
        --in_flight_;
        cv_.notify_one();
    }

private:
    std::mutex mutex_;
    std::condition_variable cv_;
    int limit_ = 4;
    int in_flight_ = 0;
};

Semaphore& chat_semaphore() {
    static Semaphore s;
    return s;
}

void validate_request(const ChatRequest& request) {
    if (request.messages.empty()) throw Error("chat request has no messages");
    bool has_user = false;
    for (std::size_t i = 0; i < request.messages.size(); ++i) {
        const auto& message = request.messages[i];
        if (message.content.empty()) throw Error("chat message content is empty");
        if (message.role == ChatRole::system && i != 0)
            throw Error("system message allowed only in first position");
        if (message.role == ChatRole::user) has_user = true;
    }
    if (!has_user) throw Error("chat request needs at least one user message");
    if (request.temperature < 0.0) throw Error("temperature must be >= 0");
    if (request.max_tokens < 1) throw Error("max_tokens must be positive");
}

nlohmann::json request_to_json(const ChatRequest& request) {
    nlohmann::json messages = nlohmann::json::array();
    for (const auto& m : request.messages)
        messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    return {{"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};
}

} // namespace

void set_chat_concurrency_limit(int limit) {
    if (limit < 1) throw Error("chat concurrency limit must be >= 1");
    chat_semaphore().set_limit(limit);
}

std::string ChatClient::complete(const ChatRequest& request) {
    validate_request(request);
    chat_semaphore().acquire();
    struct Release {
        ~Release() { chat_semaphore().release(); }
    } release_on_exit;

    std::string response;
    int attempt = 0;
    while (true) {
        try {
            response = send(request);
            break;
        } catch (const TransportError&) {
            if (++attempt > 3) throw;
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms_ << (attempt - 1)));
        }
    }

    if (!audit_path_.empty()) {
        std::lock_guard lock(audit_mutex_);
        std::ofstream out(audit_path_, std::ios::app);
        nlohmann::json line = {{"request", request_to_json(request)}, {"response", response}};
        out << line.dump() << "\n";
    }
    return response;
}

ScriptedChatClient::ScriptedChatClient(std::vector<std::string> responses)
    : queue_(responses.begin(), responses.end()) {}

ScriptedChatClient ScriptedChatClient::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open scripted-response file: " + path.string());
    nlohmann::json parsed = nlohmann::json::parse(in, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array())
        throw Error("scripted-response file must hold a JSON array of strings: " + path.string());
    std::vector<std::string> responses;
    for (const auto& item : parsed) responses.push_back(item.get<std::string>());
    return ScriptedChatClient(std::move(responses));
}

void ScriptedChatClient::push(const std::string& response) {
    std::lock_guard lock(mutex_);
    queue_.push_back(response);
}

std::size_t ScriptedChatClient::remaining() const {
    std::lock_guard lock(mutex_);
    return queue_.size();
}

std::string ScriptedChatClient::send(const ChatRequest& request) {
    std::lock_guard lock(mutex_);
    requests_.push_back(request);
    if (queue_.empty())
        throw Error("scripted chat client exhausted at call " + std::to_string(calls_));
    ++calls_;
    std::string response = std::move(queue_.front());
    queue_.pop_front();
    return response;
}

std::string HttpChatClient::send(const ChatRequest& request) {
    auto url = detail::parse_url(config_.endpoint);
    httplib::Client client(url.base);
    client.set_read_timeout(config_.timeout_seconds, 0);
    client.set_connection_timeout(10, 0);

    httplib::Headers headers;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
    }

    nlohmann::json body = request_to_json(request);
    body["model"] = config_.model;
    auto res = client.Post(url.path + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res) throw TransportError("chat request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw ProviderError(res->status, "chat endpoint returned status " +
                                             std::to_string(res->status) + ": " +
                                             res->body.substr(0, 512));

    nlohmann::json parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || parsed["choices"].empty() ||
        !parsed["choices"][0].contains("message"))
        throw ProviderError(res->status, "chat endpoint returned malformed payload");
    return parsed["choices"][0]["message"]["content"].get<std::string>();
}

// ---------------------------------------------------------------------------
// agent duet

namespace {

std::string follow_up_prompt(const std::string& question, const std::string& response) {
    return "Consider this question and response.\n\n### Question: " + question +
           "\n\n### Response: " + response +
           "\n\n### Instruction: Respond with a SINGLE follow-up question that critically "
           "challenges the response. \n\nDO NOT answer the question or comment on it yet. "
           "\n\nThe single question is: ";
}

std::string summary_prompt(const std::string& conversation) {
    return "Carefully read this conversation: \n\n<<<" + conversation +
           ">>>\n\nAccurately summarize the conversation and identify the key points "
           "made.\n\nThink step by step: ";
}

std::string key_points_prompt(const std::string& conversation) {
    return "Carefully read this conversation: \n\n<<<" + conversation +
           ">>>\n\nList the salient insights discussed in the conversation as bullet points.";
}

std::string takeaway_prompt(const std::string& conversation, const std::string& question) {
    return "Carefully read this conversation: \n\n<<<" + conversation +
           ">>>\n\nIdentify the single most important takeaway in the conversation and how it "
           "answers the original question, <<" +
           question + ">>>.";
}

ChatRequest responder_request(const AgentPersona& responder, const Transcript& transcript,
                              const std::string& question, double temperature) {
    ChatRequest request;
    request.temperature = temperature;
    request.messages.push_back({ChatRole::system, responder.system_prompt});
    for (const auto& turn : transcript.turns) {
        request.messages.push_back({ChatRole::user, turn.question});
        request.messages.push_back({ChatRole::assistant, turn.answer});
    }
    request.messages.push_back({ChatRole::user, question});
    return request;
}

} // namespace

Transcript run_agent_duet(const std::string& question, const AgentPersona& asker,
                          const AgentPersona& responder, int rounds, ChatClient& llm,
                          double temperature) {
    if (rounds < 0) throw Error("run_agent_duet: rounds must be >= 0");
    if (question.empty()) throw Error("run_agent_duet: question is empty");

    Transcript transcript;
    transcript.asker_name = asker.name;
    transcript.responder_name = responder.name;

    auto ask_llm = [&](const ChatRequest& request) {
        try {
            return llm.complete(request);
        } catch (const std::exception& e) {
            throw DuetError(std::string("duet aborted: ") + e.what(), transcript);
        }
    };

    std::string answer = ask_llm(responder_request(responder, transcript, question, temperature));
    transcript.turns.push_back({question, answer});

    for (int round = 0; round < rounds; ++round) {
        const TranscriptTurn& last = transcript.turns.back();
        ChatRequest ask;
        ask.temperature = temperature;
        ask.messages.push_back({ChatRole::system, asker.system_prompt});
        ask.messages.push_back({ChatRole::user, follow_up_prompt(last.question, last.answer)});
        std::string next_question = ask_llm(ask);

        std::string next_answer =
            ask_llm(responder_request(responder, transcript, next_question, temperature));
        transcript.turns.push_back({next_question, next_answer});
    }
    return transcript;
}

void summarize_transcript(Transcript& transcript, ChatClient& llm) {
    if (transcript.turns.empty()) throw Error("summarize_transcript: empty transcript");
    std::string conversation = transcript_to_text(transcript);
    const std::string& original_question = transcript.turns.front().question;

    // fill a copy first so a failed completion leaves the transcript untouched
    std::string summary = llm.complete({{{ChatRole::user, summary_prompt(conversation)}}});
    std::string key_points = llm.complete({{{ChatRole::user, key_points_prompt(conversation)}}});
    std::string takeaway =
        llm.complete({{{ChatRole::user, takeaway_prompt(conversation, original_question)}}});

    transcript.summary = std::move(summary);
    transcript.key_points = std::move(key_points);
    transcript.takeaway = std::move(takeaway);
}

std::string Transcript::concatenated() const {
    std::string out;
    for (const auto& turn : turns) {
        out += turn.question + "\n\n" + turn.answer + "\n\n";
    }
    if (!summary.empty()) out += summary + "\n\n";
    if (!key_points.empty()) out += key_points + "\n\n";
    if (!takeaway.empty()) out += takeaway + "\n";
    return out;
}

std::string transcript_to_text(const Transcript& transcript) {
    std::string out;
    for (const auto& turn : transcript.turns) {
        out += "Asker: " + turn.question + "\n\n";
        out += "Responder: " + turn.answer + "\n\n";
    }
    return out;
}

std::string transcript_to_json(const Transcript& transcript) {
    nlohmann::json turns = nlohmann::json::array();
    for (const auto& turn : transcript.turns)
        turns.push_back({{"question", turn.question}, {"answer", turn.answer}});
    nlohmann::json doc = {{"asker", transcript.asker_name},
                          {"responder", transcript.responder_name},
                          {"turns", turns},
                          {"summary", transcript.summary},
                          {"key_points", transcript.key_points},
                          {"takeaway", transcript.takeaway}};
    return doc.dump(2);
}

Transcript transcript_from_json(const std::string& text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw Error("transcript_from_json: malformed JSON");
    Transcript t;
    t.asker_name = doc.value("asker", "");
    t.responder_name = doc.value("responder", "");
    for (const auto& turn : doc.value("turns", nlohmann::json::array()))
        t.turns.push_back({turn.at("question").get<std::string>(),
                           turn.at("answer").get<std::string>()});
    t.summary = doc.value("summary", "");
    t.key_points = doc.value("key_points", "");
    t.takeaway = doc.value("takeaway", "");
    return t;
}

} // namespace kg
