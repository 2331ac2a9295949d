#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "detour/token_dist.hpp"

#include <nlohmann/json_fwd.hpp>

namespace detour::gateway {

/// Connection settings for a remote chat/logprob service. Credentials are
/// only ever named by environment variable; the value never enters configs
/// or logs.
struct BackendConfig {
  std::string endpoint;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 256;
  int top_k_logprobs = 5;
  double timeout_seconds = 30.0;
  int retry_budget = 2;
  std::string credential_env;
  double rate_capacity = 0.0;  // 0 = unlimited
  double rate_refill_per_second = 1.0;

  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

struct LogprobEntry {
  std::string token;
  double logprob = 0.0;  // <= 0
};

/// One teacher-forced position: the forced token and its top-k listing.
struct LogprobPosition {
  std::string token;
  std::vector<LogprobEntry> top;
};

struct LogprobTrace {
  std::vector<LogprobPosition> positions;
  void validate() const;
};

/// Tail-bucket construction: exp() the listed logprobs, assign the leftover
/// mass to the tail. Total mass is preserved at 1 within 1e-6.
dist::DistTrace to_dist_trace(const LogprobTrace& trace);

/// Append-only log of outbound requests, written before transmission with
/// credentials redacted. One line per request.
class RequestLog {
 public:
  void append(std::string line);
  std::size_t size() const;
  std::vector<std::string> lines() const;

 private:
  mutable std::mutex mutex_;
  std::vector<std::string> lines_;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string chat(std::span<const ChatMessage> messages) = 0;
};

/// Token-distribution access used by the distribution analyzer.
class LogprobBackend {
 public:
  virtual ~LogprobBackend() = default;

  /// Greedy response to `context`, already tokenized by the backend.
  virtual std::vector<std::string> respond_tokens(const std::string& context) = 0;

  /// Top-k distributions at every continuation position under teacher
  /// forcing. `continuation` must be non-empty.
  virtual LogprobTrace score_continuation(const std::string& context,
                                          std::span<const std::string> continuation) = 0;
};

/// Table-driven chat mock. Replies are served in order; the last one
/// repeats. Every request body is recorded verbatim.
class ScriptedChatBackend final : public ChatBackend {
 public:
  explicit ScriptedChatBackend(std::vector<std::string> replies,
                               std::shared_ptr<RequestLog> log = nullptr);

  std::string chat(std::span<const ChatMessage> messages) override;

  const std::vector<std::string>& recorded_requests() const { return requests_; }

 private:
  std::vector<std::string> replies_;
  std::vector<std::string> requests_;
  std::size_t calls_ = 0;
  std::shared_ptr<RequestLog> log_;
};

/// Fully scripted logprob mock: responses and traces come from tables set up
/// by the test. Unknown keys raise ProtocolFault, which is also how analyzer
/// degradation is exercised.
class TableLogprobBackend final : public LogprobBackend {
 public:
  explicit TableLogprobBackend(std::shared_ptr<RequestLog> log = nullptr);

  void set_response(const std::string& context, std::vector<std::string> tokens);
  void set_trace(const std::string& context, std::span<const std::string> continuation,
                 LogprobTrace trace);

  std::vector<std::string> respond_tokens(const std::string& context) override;
  LogprobTrace score_continuation(const std::string& context,
                                  std::span<const std::string> continuation) override;

 private:
  static std::string trace_key(const std::string& context,
                               std::span<const std::string> continuation);

  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, LogprobTrace> traces_;
  std::shared_ptr<RequestLog> log_;
};

/// Deterministic stand-in surrogate for offline runs: distributions are pure
/// functions of (seed, context, position), so different contexts diverge and
/// identical contexts agree bit for bit.
class SyntheticLogprobBackend final : public LogprobBackend {
 public:
  explicit SyntheticLogprobBackend(std::uint64_t seed, std::shared_ptr<RequestLog> log = nullptr);

  std::vector<std::string> respond_tokens(const std::string& context) override;
  LogprobTrace score_continuation(const std::string& context,
                                  std::span<const std::string> continuation) override;

 private:
  std::uint64_t seed_;
  std::shared_ptr<RequestLog> log_;
};

/// Token-bucket rate limiter. The clock is passed in, so the refill logic is
/// testable without sleeping; acquire_blocking() uses the steady clock.
class TokenBucket {
 public:
  TokenBucket(double capacity, double refill_per_second);

  bool try_acquire(double now_seconds, double tokens = 1.0);
  double wait_seconds(double now_seconds, double tokens = 1.0) const;
  void acquire_blocking(double tokens = 1.0);

 private:
  void refill(double now_seconds);

  double capacity_;
  double refill_per_second_;
  double available_;
  double last_refill_ = 0.0;
  bool primed_ = false;
  std::mutex mutex_;
};

/// One request/response pair of a recorded session.
struct CassetteEntry {
  std::string request;  // canonical JSON
  std::string response;
};

/// Wraps a live backend and records every exchange for offline replay.
class RecordingChatBackend final : public ChatBackend {
 public:
  explicit RecordingChatBackend(ChatBackend& inner);

  std::string chat(std::span<const ChatMessage> messages) override;

  const std::vector<CassetteEntry>& entries() const { return entries_; }
  void save(const std::filesystem::path& file) const;

 private:
  ChatBackend& inner_;
  std::vector<CassetteEntry> entries_;
};

/// Replays a cassette in order. Requests must match what was recorded;
/// mismatches and exhaustion raise ProtocolFault.
class ReplayChatBackend final : public ChatBackend {
 public:
  explicit ReplayChatBackend(std::vector<CassetteEntry> entries);
  static ReplayChatBackend load(const std::filesystem::path& file);

  std::string chat(std::span<const ChatMessage> messages) override;

 private:
  std::vector<CassetteEntry> entries_;
  std::size_t next_ = 0;
};

/// Canonical request body used by chat mocks, cassettes and request logs.
std::string chat_request_body(std::span<const ChatMessage> messages);

}  // namespace detour::gateway
