#pragma once

#include "kg/graph.hpp"

#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace kg {

enum class ChatRole { system, user, assistant };

struct ChatMessage {
    ChatRole role = ChatRole::user;
    std::string content;
};

struct ChatRequest {
    std::vector<ChatMessage> messages;
    double temperature = 0.1;
    int max_tokens = 2048;
};

class TransportError : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    ProviderError(int status, const std::string& what) : Error(what), status_(status) {}
    int status() const { return status_; }

private:
    int status_ = 0;
};

/// Bound on in-flight chat completions across all clients.
void set_chat_concurrency_limit(int limit);

class ChatClient {
public:
    virtual ~ChatClient() = default;

    /// Validates the request, then attempts the call, retrying transient
    /// transport failures up to 3 times with backoff. Provider errors
    /// (non-200 payloads) are surfaced immediately.
    std::string complete(const ChatRequest& request);

    /// When set, every request/response pair is appended as a JSON line.
    void set_audit_log(const std::filesystem::path& path) { audit_path_ = path; }
    void set_retry_backoff_ms(int ms) { backoff_ms_ = ms; }

protected:
    virtual std::string send(const ChatRequest& request) = 0;

private:
    std::filesystem::path audit_path_;
    int backoff_ms_ = 250;
    std::mutex audit_mutex_;
};

/// Deterministic mock: answers come from a fixed queue, in order.
class ScriptedChatClient : public ChatClient {
public:
    ScriptedChatClient() = default;
    explicit ScriptedChatClient(std::vector<std::string> responses);

    /// Loads a JSON array of strings (the scripted-response file format).
    static ScriptedChatClient from_file(const std::filesystem::path& path);

    void push(const std::string& response);
    std::size_t remaining() const;
    std::size_t calls_made() const { return calls_; }
    const std::vector<ChatRequest>& captured_requests() const { return requests_; }

protected:
    std::string send(const ChatRequest& request) override;

private:
    mutable std::mutex mutex_;
    std::deque<std::string> queue_;
    std::vector<ChatRequest> requests_;
    std::size_t calls_ = 0;
};

struct HttpChatConfig {
    std::string endpoint; // base URL, e.g. http://localhost:8080/v1
    std::string model;
    std::string api_key_env;
    int timeout_seconds = 300;
};

/// Chat-completions-style client: POST {endpoint}/chat/completions.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(HttpChatConfig config) : config_(std::move(config)) {}

protected:
    std::string send(const ChatRequest& request) override;

private:
    HttpChatConfig config_;
};

struct AgentPersona {
    std::string name;
    std::string system_prompt;
};

struct TranscriptTurn {
    std::string question;
    std::string answer;
};

struct Transcript {
    std::string asker_name;
    std::string responder_name;
    std::vector<TranscriptTurn> turns; // initial exchange + one per round
    std::string summary;
    std::string key_points;
    std::string takeaway;

    /// Raw text of the whole exchange, the basis for downstream graph generation.
    std::string concatenated() const;
};

class DuetError : public Error {
public:
    DuetError(const std::string& what, Transcript partial)
        : Error(what), partial_(std::move(partial)) {}
    const Transcript& partial_transcript() const { return partial_; }

private:
    Transcript partial_;
};

/// The responder answers `question`; then `rounds` times the asker produces a
/// follow-up that critically challenges the latest answer and the responder
/// replies. Consumes exactly 2*rounds + 1 completions.
Transcript run_agent_duet(const std::string& question, const AgentPersona& asker,
                          const AgentPersona& responder, int rounds, ChatClient& llm,
                          double temperature = 0.7);

/// Fills summary, key_points and takeaway (three completions, in that order).
/// On failure the transcript is left unmodified.
void summarize_transcript(Transcript& transcript, ChatClient& llm);

/// Plain-text export with "Asker:" / "Responder:" prefixes.
std::string transcript_to_text(const Transcript& transcript);

std::string transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(const std::string& text);

} // namespace kg
