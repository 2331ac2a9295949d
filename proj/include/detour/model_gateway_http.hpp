#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "detour/model_gateway.hpp"

#include <nlohmann/json_fwd.hpp>

namespace detour::gateway {

/// Process-wide count of HTTP requests actually sent. Offline runs assert
/// this stays at zero.
std::uint64_t http_request_count();

namespace detail {
/// Shared HTTP plumbing: credential resolution, request logging, retry with
/// exponential backoff, rate limiting.
class HttpTransport {
 public:
  HttpTransport(BackendConfig cfg, std::shared_ptr<RequestLog> log);

  nlohmann::json post_json(const std::string& path, const nlohmann::json& body);

  const BackendConfig& config() const { return cfg_; }

 private:
  BackendConfig cfg_;
  std::string credential_;
  std::shared_ptr<RequestLog> log_;
  std::unique_ptr<TokenBucket> bucket_;
};
}  // namespace detail

/// Chat-completions client (messages array in, choices array out).
class HttpChatBackend final : public ChatBackend {
 public:
  HttpChatBackend(BackendConfig cfg, std::shared_ptr<RequestLog> log = nullptr);

  std::string chat(std::span<const ChatMessage> messages) override;

 private:
  detail::HttpTransport transport_;
};

/// Logprob client. respond_tokens uses chat completions with logprobs;
/// score_continuation uses the echoed-prompt completions form so the
/// continuation is teacher-forced. Construction fails with CapabilityFault
/// when the config cannot carry logprobs.
class HttpLogprobBackend final : public LogprobBackend {
 public:
  HttpLogprobBackend(BackendConfig cfg, std::shared_ptr<RequestLog> log = nullptr);

  std::vector<std::string> respond_tokens(const std::string& context) override;
  LogprobTrace score_continuation(const std::string& context,
                                  std::span<const std::string> continuation) override;

 private:
  detail::HttpTransport transport_;
};

}  // namespace detour::gateway
