#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace usp {

enum class Channel { Semantic, Style };

std::string channel_name(Channel c);

struct ChatMessage {
  std::string role;  // "user" or "assistant"
  std::string text;
};

struct ChatRequest {
  std::optional<std::string> system;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::optional<std::uint64_t> seed;
};

struct EmbeddingVector {
  std::vector<double> values;
  Channel channel = Channel::Semantic;
  bool normalized = false;
};

struct RetryPolicy {
  int max_attempts = 3;
  double backoff_base_s = 0.25;
};

struct BackendConfig {
  std::string endpoint;  // "mock:[seed=N][,dim=D]" or "http(s)://host[:port]/base"
  std::string model;
  std::string auth_env;  // name of the env var holding the bearer token
  double rate_limit_rps = 8.0;
  RetryPolicy retry;
};

/// One model backend: chat completion, text embedding, AI-utterance detection.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                             Channel channel) = 0;
  /// Probability in [0, 1] that the text is AI-generated.
  virtual double ai_detect(const std::string& text) = 0;
  virtual std::size_t embedding_dim() const = 0;
};

/// Dispatches on the endpoint scheme: "mock:" yields the deterministic offline
/// backend, "http://" / "https://" the chat-completions-compatible HTTP client.
std::shared_ptr<Backend> make_backend(const BackendConfig& config);

struct GatewayConfig {
  BackendConfig chat;
  BackendConfig embed_semantic;
  BackendConfig embed_style;
  BackendConfig detector;
};

/// Single entry point for every model call the pipeline makes. Shareable
/// across threads; rate limiting and retry state live inside the backends.
class Gateway {
 public:
  explicit Gateway(const GatewayConfig& config);
  Gateway(std::shared_ptr<Backend> chat, std::shared_ptr<Backend> embed_semantic,
          std::shared_ptr<Backend> embed_style, std::shared_ptr<Backend> detector);

  std::string complete(const ChatRequest& request) const;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     Channel channel) const;
  EmbeddingVector embed_one(const std::string& text, Channel channel) const;
  double ai_detect(const std::string& text) const;

  Backend& chat_backend() const { return *chat_; }

 private:
  std::shared_ptr<Backend> chat_;
  std::shared_ptr<Backend> embed_semantic_;
  std::shared_ptr<Backend> embed_style_;
  std::shared_ptr<Backend> detector_;
};

}  // namespace usp
