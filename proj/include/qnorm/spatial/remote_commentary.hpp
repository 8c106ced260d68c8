#pragma once

// Optional remote text generation for commentary lines. The endpoint gets a
// plain-text prompt via POST and answers with plain text. Any failure drops
// back to the stub templates for that line and all later ones.
//
// Requires cpp-httplib on the include path (target qnorm::scenario).

#include <chrono>
#include <cstdlib>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>

#include "qnorm/spatial/commentary.hpp"

namespace qnorm::spatial {

struct RemoteCommentaryConfig {
  std::string endpoint;        // e.g. https://host:port/path
  std::string credential_env;  // name of the env var holding a bearer token
  double timeout_seconds = 10.0;
};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline std::optional<SplitUrl> split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) return std::nullopt;
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") return std::nullopt;
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return SplitUrl{url, "/"};
  return SplitUrl{url.substr(0, path_start), url.substr(path_start)};
}

inline std::string commentary_prompt(const AgentEvent& e) {
  std::string p = "One short first-person line from a townsperson with ";
  p += to_string(trust_band(e.profile.trust));
  p += " trust in authority who just had this happen: ";
  p += to_string(e.kind);
  p += " (";
  p += to_string(e.place);
  p += ").";
  return p;
}

class RemoteCommentaryClient {
 public:
  explicit RemoteCommentaryClient(RemoteCommentaryConfig config) : config_(std::move(config)) {}

  // Returns nullopt on any transport or HTTP failure; `error` gets the reason.
  std::optional<std::string> generate(const std::string& prompt, std::string& error) const {
    const auto url = split_url(config_.endpoint);
    if (!url) {
      error = "unsupported commentary endpoint '" + config_.endpoint + "'";
      return std::nullopt;
    }
    httplib::Client client(url->origin);
    const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    if (!config_.credential_env.empty()) {
      if (const char* token = std::getenv(config_.credential_env.c_str()); token && *token) {
        client.set_bearer_token_auth(token);
      }
    }
    auto res = client.Post(url->path, prompt, "text/plain");
    if (!res) {
      error = "commentary request failed: " + httplib::to_string(res.error());
      return std::nullopt;
    }
    if (res->status != 200) {
      error = "commentary endpoint returned HTTP " + std::to_string(res->status);
      return std::nullopt;
    }
    std::string text = res->body;
    while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
    if (text.empty() || text.find('\n') != std::string::npos) {
      error = "commentary endpoint returned an empty or multi-line body";
      return std::nullopt;
    }
    return text;
  }

 private:
  RemoteCommentaryConfig config_;
};

using WarningSink = std::function<void(const std::string&)>;

inline std::vector<std::string> remote_commentary(const std::vector<AgentEvent>& events,
                                                  const RemoteCommentaryConfig& config, const WarningSink& warn) {
  RemoteCommentaryClient client(config);
  std::vector<std::string> lines;
  lines.reserve(events.size());
  bool remote_ok = true;
  for (const auto& e : events) {
    std::optional<std::string> text;
    if (remote_ok) {
      std::string error;
      text = client.generate(commentary_prompt(e), error);
      if (!text) {
        remote_ok = false;
        if (warn) warn(error + "; falling back to template commentary");
      }
    }
    lines.push_back(commentary_line(e, text ? *text : commentary(e.profile, e.kind)));
  }
  return lines;
}

}  // namespace qnorm::spatial
