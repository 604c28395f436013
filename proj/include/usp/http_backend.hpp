#pragma once

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "usp/gateway.hpp"

namespace usp {

/// Token-bucket limiter: tokens refill at `rate_per_s` up to `capacity`;
/// acquire() blocks until a token is available. Concurrent callers therefore
/// never exceed the configured rate by more than one in-flight burst.
class TokenBucket {
 public:
  TokenBucket(double rate_per_s, double capacity);
  void acquire();
  bool try_acquire();

 private:
  void refill_locked();

  double rate_;
  double capacity_;
  double tokens_;
  std::chrono::steady_clock::time_point last_refill_;
  std::mutex mu_;
};

/// Chat-completions-compatible HTTP backend.
///
/// Routes: POST {endpoint}/chat, {endpoint}/embed, {endpoint}/detect, JSON
/// bodies, bearer auth read from the environment variable named in the
/// config. Transient failures (HTTP 429, 5xx, transport errors) are retried
/// with exponential backoff up to retry.max_attempts.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(const BackendConfig& config);
  ~HttpBackend() override;

  std::string complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     Channel channel) override;
  double ai_detect(const std::string& text) override;
  std::size_t embedding_dim() const override;

  /// Retries performed by the most recent call (0 when the first attempt
  /// succeeded).
  int last_retry_count() const { return last_retry_count_; }

 private:
  struct Impl;
  std::string post_json(const std::string& route, const std::string& body);

  BackendConfig config_;
  std::string base_path_;
  std::unique_ptr<Impl> impl_;
  TokenBucket bucket_;
  mutable std::mutex dim_mu_;
  mutable std::size_t cached_dim_ = 0;
  int last_retry_count_ = 0;
};

}  // namespace usp
