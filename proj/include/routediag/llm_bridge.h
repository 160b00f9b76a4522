#pragma once

#include <deque>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "routediag/diagnosis.h"
#include "routediag/instance.h"

namespace routediag {

struct ChatClientConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4o-mini";
  double timeout_s = 30.0;
  // Name of the environment variable holding the bearer token.
  std::string api_key_env = "ROUTEDIAG_API_KEY";
  bool enabled = false;

  // Throws ConfigError when timeout_s <= 0.
  void validate() const;
};

// Carries one chat-completion request body to the endpoint and returns the
// response body. Throws TransportError on any failure.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string post(const std::string& body, const ChatClientConfig& cfg) = 0;
};

class HttpChatTransport : public ChatTransport {
 public:
  std::string post(const std::string& body, const ChatClientConfig& cfg) override;
};

// Test double: answers from a queue of canned bodies or from a callback
// and records every request body.
class ScriptedTransport : public ChatTransport {
 public:
  using Handler = std::function<std::string(const std::string& request)>;

  explicit ScriptedTransport(std::vector<std::string> responses);
  explicit ScriptedTransport(Handler handler);

  std::string post(const std::string& body, const ChatClientConfig& cfg) override;

  const std::vector<std::string>& requests() const { return _requests; }

 private:
  std::deque<std::string> _responses;
  Handler _handler;
  std::vector<std::string> _requests;
};

// Wraps `content` as a minimal chat-completion response body.
std::string make_chat_response(std::string_view content);

// Content of the last user message of a request body.
std::string last_user_message(std::string_view request);

struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

enum class ParseSource { rules, external };

struct ParseOutcome {
  // Sorted by family.
  std::vector<ConstraintSpec> constraints;
  // Sentences no rule recognised.
  std::vector<TextSpan> unparsed;
  ParseSource source = ParseSource::rules;
  std::vector<std::string> warnings;
};

// Rules first over the template sentences; when enabled and sentences
// remain unrecognised, one structured external call. Time windows are
// taken from `nodes`.
ParseOutcome parse_description(std::string_view text, std::span<const Node> nodes,
                               const ChatClientConfig& cfg, ChatTransport* transport = nullptr);

struct RephraseOutcome {
  std::string text;
  bool external = false;
  std::vector<std::string> warnings;
};

// External rephrasing of the rendered report text. Falls back to the
// template text unless every old and new value survives verbatim.
RephraseOutcome rephrase(const SuggestionReport& report, const ChatClientConfig& cfg,
                         ChatTransport* transport = nullptr);

}  // namespace routediag
