#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include "routediag/llm_bridge.h"

#include <algorithm>
#include <cstdlib>
#include <regex>

#include <fmt/format.h>

#include "routediag/errors.h"
#include "routediag/io.h"

namespace routediag {

namespace {

const char* kParseSystemPrompt =
    "You convert vehicle routing requirements into constraint objects. Reply with a JSON "
    "object {\"constraints\": [...]} whose entries use exactly one of these shapes: "
    "{\"family\":\"Capacity\",\"Q\":number}, {\"family\":\"DistanceLimit\",\"Lmax\":number}, "
    "{\"family\":\"PickupDelivery\",\"pairs\":[[pickup,delivery],...]}, "
    "{\"family\":\"SameVehicle\",\"groups\":[[node,...],...]}, "
    "{\"family\":\"Priority\",\"rank\":[rank of node 0, rank of node 1, ...]}, "
    "{\"family\":\"DynamicDemand\",\"node\":id,\"k\":number,\"depot\":id}. "
    "Use {\"family\":\"TimeWindows\"} without parameters for time-window requirements.";

const char* kRephraseSystemPrompt =
    "Rewrite the following routing requirements and suggested changes as clear prose. Keep "
    "every number exactly as written. Reply with the rewritten text only.";

std::string request_body(const ChatClientConfig& cfg, std::string_view system,
                         std::string_view user, bool structured) {
  Json body;
  body["model"] = cfg.model;
  body["messages"] = Json::array({{{"role", "system"}, {"content", system}},
                                  {{"role", "user"}, {"content", user}}});
  if (structured) body["response_format"] = {{"type", "json_object"}};
  return body.dump();
}

// Single structured payload of a chat-completion response.
std::string response_content(const std::string& body) {
  const Json doc = Json::parse(body, nullptr, false);
  if (doc.is_discarded()) throw TransportError("response is not JSON");
  const auto& choices = doc.value("choices", Json::array());
  if (!choices.is_array() || choices.empty()) throw TransportError("response has no choices");
  const auto& message = choices[0].value("message", Json::object());
  if (!message.contains("content") || !message["content"].is_string()) {
    throw TransportError("response message has no content");
  }
  return message["content"].get<std::string>();
}

std::string exchange(ChatTransport& transport, const ChatClientConfig& cfg,
                     std::string_view system, std::string_view user, bool structured) {
  return response_content(transport.post(request_body(cfg, system, user, structured), cfg));
}

struct Sentence {
  std::string_view text;
  TextSpan span;
};

std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  const auto push = [&](std::size_t end) {
    std::size_t b = start;
    while (b < end && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    std::size_t e = end;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    if (e > b) out.push_back({text.substr(b, e - b), {b, e}});
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    // A period ends a sentence unless it sits inside a number.
    if (text[i] != '.') continue;
    const bool decimal = i > 0 && i + 1 < text.size() &&
                         std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                         std::isdigit(static_cast<unsigned char>(text[i + 1]));
    if (decimal) continue;
    push(i + 1);
    start = i + 1;
  }
  push(text.size());
  return out;
}

std::vector<int> ints_in(const std::string& text) {
  static const std::regex number(R"(-?\d+)");
  std::vector<int> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), number);
       it != std::sregex_iterator(); ++it) {
    out.push_back(std::stoi(it->str()));
  }
  return out;
}

struct Rules {
  std::optional<CapacityParams> capacity;
  std::optional<DistanceLimitParams> length;
  bool time_windows = false;
  std::optional<PickupDeliveryParams> pickup_delivery;
  std::optional<SameVehicleParams> same_vehicle;
  std::optional<PriorityParams> priority;
  std::optional<DynamicDemandParams> dynamic;

  // True when the sentence matched a rule.
  bool consume(const std::string& s, std::size_t node_count) {
    static const std::string num = R"((-?\d+(?:\.\d+)?))";
    static const std::regex capacity_re("total load on each route stays within " + num +
                                        " units");
    static const std::regex length_re("each route is no longer than " + num + " units");
    static const std::regex tw_re("each customer is served within its time window");
    static const std::regex pd_re(R"(pickup-delivery pairs ((?:\[\d+, \d+\](?:, )?)+))");
    static const std::regex sv_re(R"(nodes \[([\d, ]+)\] are served by the same vehicle)");
    static const std::regex prio_mod_re(
        R"(smaller priority rank are visited first, where the rank of each node is its index mod (\d+))");
    static const std::regex prio_list_re(
        R"(smaller priority rank are visited first, where node ranks are \[([\d:, ]*)\])");
    static const std::regex dyn_re(R"(for node \[(\d+)\], its base demand is augmented by )" +
                                   num +
                                   R"( times the square root of the accumulated travel )"
                                   R"(distance from the depot \[(\d+)\])");
    std::smatch m;
    if (std::regex_search(s, m, capacity_re)) {
      capacity = CapacityParams{std::stod(m[1])};
      return true;
    }
    if (std::regex_search(s, m, length_re)) {
      length = DistanceLimitParams{std::stod(m[1])};
      return true;
    }
    if (std::regex_search(s, tw_re)) {
      time_windows = true;
      return true;
    }
    if (std::regex_search(s, m, pd_re)) {
      const auto ids = ints_in(m[1]);
      PickupDeliveryParams p;
      for (std::size_t i = 0; i + 1 < ids.size(); i += 2) p.pairs.push_back({ids[i], ids[i + 1]});
      pickup_delivery = std::move(p);
      return true;
    }
    if (std::regex_search(s, m, sv_re)) {
      if (!same_vehicle) same_vehicle = SameVehicleParams{};
      same_vehicle->groups.push_back(ints_in(m[1]));
      return true;
    }
    if (std::regex_search(s, m, prio_mod_re)) {
      const int mod = std::stoi(m[1]);
      if (mod <= 0) return false;
      PriorityParams p;
      for (std::size_t i = 0; i < node_count; ++i) p.rank.push_back(static_cast<int>(i) % mod);
      priority = std::move(p);
      return true;
    }
    if (std::regex_search(s, m, prio_list_re)) {
      const auto ids = ints_in(m[1]);
      PriorityParams p;
      p.rank.assign(node_count, 0);
      for (std::size_t i = 0; i + 1 < ids.size(); i += 2) {
        if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= node_count) return false;
        p.rank[ids[i]] = ids[i + 1];
      }
      priority = std::move(p);
      return true;
    }
    if (std::regex_search(s, m, dyn_re)) {
      dynamic = DynamicDemandParams{std::stoi(m[1]), std::stod(m[2]), std::stoi(m[3])};
      return true;
    }
    return false;
  }
};

TimeWindowsParams windows_from(std::span<const Node> nodes) {
  TimeWindowsParams p;
  for (const auto& n : nodes) p.windows.push_back({n.id, n.ready, n.due, n.service});
  return p;
}

void sort_by_family(std::vector<ConstraintSpec>& specs) {
  std::stable_sort(specs.begin(), specs.end(),
                   [](const auto& a, const auto& b) { return a.family() < b.family(); });
}

bool has_family(const std::vector<ConstraintSpec>& specs, Family f) {
  return std::any_of(specs.begin(), specs.end(), [&](const auto& s) { return s.family() == f; });
}

}  // namespace

void ChatClientConfig::validate() const {
  if (!(timeout_s > 0)) throw ConfigError("chat client timeout must be positive");
}

std::string HttpChatTransport::post(const std::string& body, const ChatClientConfig& cfg) {
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(cfg.endpoint, m, url)) {
    throw TransportError(fmt::format("malformed endpoint '{}'", cfg.endpoint));
  }
  httplib::Client client(m[1].str());
  const auto seconds = static_cast<time_t>(cfg.timeout_s);
  const auto micros = static_cast<time_t>((cfg.timeout_s - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key != nullptr && *key != '\0') {
    headers.emplace("Authorization", fmt::format("Bearer {}", key));
  }
  const std::string path = m[2].matched ? m[2].str() : "/";
  const auto res = client.Post(path, headers, body, "application/json");
  if (!res) {
    throw TransportError(
        fmt::format("request to {} failed: {}", cfg.endpoint, httplib::to_string(res.error())));
  }
  if (res->status < 200 || res->status >= 300) {
    throw TransportError(fmt::format("endpoint answered HTTP {}", res->status));
  }
  return res->body;
}

ScriptedTransport::ScriptedTransport(std::vector<std::string> responses)
    : _responses(responses.begin(), responses.end()) {}

ScriptedTransport::ScriptedTransport(Handler handler) : _handler(std::move(handler)) {}

std::string ScriptedTransport::post(const std::string& body, const ChatClientConfig&) {
  _requests.push_back(body);
  if (_handler) return _handler(body);
  if (_responses.empty()) throw TransportError("scripted transport has no response left");
  std::string next = std::move(_responses.front());
  _responses.pop_front();
  return next;
}

std::string make_chat_response(std::string_view content) {
  Json doc;
  doc["choices"] =
      Json::array({{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}});
  return doc.dump();
}

std::string last_user_message(std::string_view request) {
  const Json doc = Json::parse(request, nullptr, false);
  if (doc.is_discarded() || !doc.contains("messages")) return {};
  std::string out;
  for (const auto& msg : doc["messages"]) {
    if (msg.value("role", "") == "user") out = msg.value("content", "");
  }
  return out;
}

ParseOutcome parse_description(std::string_view text, std::span<const Node> nodes,
                               const ChatClientConfig& cfg, ChatTransport* transport) {
  ParseOutcome out;
  Rules rules;
  std::vector<Sentence> leftover;
  for (const auto& sentence : split_sentences(text)) {
    if (!rules.consume(std::string(sentence.text), nodes.size())) {
      out.unparsed.push_back(sentence.span);
      leftover.push_back(sentence);
    }
  }

  auto& specs = out.constraints;
  if (rules.capacity) specs.push_back({*rules.capacity});
  if (rules.length) specs.push_back({*rules.length});
  if (rules.time_windows) specs.push_back({windows_from(nodes)});
  if (rules.pickup_delivery) specs.push_back({*rules.pickup_delivery});
  if (rules.same_vehicle) specs.push_back({*rules.same_vehicle});
  if (rules.priority) specs.push_back({*rules.priority});
  if (rules.dynamic) specs.push_back({*rules.dynamic});

  // Rule output referencing unknown nodes is dropped with a warning.
  std::erase_if(specs, [&](const ConstraintSpec& spec) {
    try {
      validate_constraint(spec, nodes.size());
      return false;
    } catch (const Error& e) {
      out.warnings.push_back(fmt::format("ignored {} requirement: {}",
                                         family_name(spec.family()), e.what()));
      return true;
    }
  });

  if (cfg.enabled && transport != nullptr && !leftover.empty()) {
    std::string user;
    for (const auto& s : leftover) {
      if (!user.empty()) user += ' ';
      user += s.text;
    }
    try {
      cfg.validate();
      const Json payload = Json::parse(exchange(*transport, cfg, kParseSystemPrompt, user, true),
                                       nullptr, false);
      if (payload.is_discarded() || !payload.contains("constraints") ||
          !payload["constraints"].is_array()) {
        throw SchemaError("constraints", "external response lacks a constraints array");
      }
      std::vector<ConstraintSpec> extra;
      const auto& list = payload["constraints"];
      for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = fmt::format("constraints[{}]", i);
        if (list[i].is_object() && list[i].value("family", "") == "TimeWindows" &&
            !list[i].contains("windows")) {
          extra.push_back({windows_from(nodes)});
        } else {
          extra.push_back(constraint_from_json(list[i], path));
        }
        try {
          validate_constraint(extra.back(), nodes.size());
        } catch (const Error& e) {
          throw SchemaError(path, e.what());
        }
      }
      for (auto& spec : extra) {
        if (!has_family(specs, spec.family())) specs.push_back(std::move(spec));
      }
      out.source = ParseSource::external;
      out.unparsed.clear();
    } catch (const Error& e) {
      out.warnings.push_back(fmt::format("external parse rejected, using rules only: {}", e.what()));
    } catch (const std::exception& e) {
      out.warnings.push_back(fmt::format("external parse rejected, using rules only: {}", e.what()));
    }
  }
  sort_by_family(specs);
  return out;
}

RephraseOutcome rephrase(const SuggestionReport& report, const ChatClientConfig& cfg,
                         ChatTransport* transport) {
  RephraseOutcome out{report.text, false, {}};
  if (!cfg.enabled || transport == nullptr) return out;
  std::string candidate;
  try {
    cfg.validate();
    candidate = exchange(*transport, cfg, kRephraseSystemPrompt, report.text, false);
  } catch (const std::exception& e) {
    out.warnings.push_back(fmt::format("rephrasing failed, keeping template text: {}", e.what()));
    return out;
  }
  static const std::regex number(R"(\d+(?:\.\d+)?)");
  for (auto it = std::sregex_iterator(report.text.begin(), report.text.end(), number);
       it != std::sregex_iterator(); ++it) {
    if (candidate.find(it->str()) == std::string::npos) {
      out.warnings.push_back(fmt::format(
          "rephrased text dropped the value {}, keeping template text", it->str()));
      return out;
    }
  }
  out.text = std::move(candidate);
  out.external = true;
  return out;
}

}  // namespace routediag
