#include "usp/gateway.hpp"

#include <algorithm>
#include <cmath>

#include "usp/errors.hpp"
#include "usp/http_backend.hpp"
#include "usp/mock_backend.hpp"

namespace usp {

std::string channel_name(Channel c) {
  return c == Channel::Semantic ? "semantic" : "style";
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.endpoint.rfind("mock:", 0) == 0) {
    return std::make_shared<MockBackend>(MockBackend::from_endpoint(config.endpoint));
  }
  if (config.endpoint.rfind("http://", 0) == 0 ||
      config.endpoint.rfind("https://", 0) == 0) {
    return std::make_shared<HttpBackend>(config);
  }
  throw PreconditionError("unknown endpoint scheme in '" + config.endpoint + "'");
}

Gateway::Gateway(const GatewayConfig& config)
    : chat_(make_backend(config.chat)),
      embed_semantic_(make_backend(config.embed_semantic)),
      embed_style_(make_backend(config.embed_style)),
      detector_(make_backend(config.detector)) {}

Gateway::Gateway(std::shared_ptr<Backend> chat,
                 std::shared_ptr<Backend> embed_semantic,
                 std::shared_ptr<Backend> embed_style,
                 std::shared_ptr<Backend> detector)
    : chat_(std::move(chat)),
      embed_semantic_(std::move(embed_semantic)),
      embed_style_(std::move(embed_style)),
      detector_(std::move(detector)) {}

std::string Gateway::complete(const ChatRequest& request) const {
  if (request.messages.empty()) {
    throw PreconditionError("chat request has no messages");
  }
  for (const auto& m : request.messages) {
    if (m.role != "user" && m.role != "assistant") {
      throw PreconditionError("message role must be 'user' or 'assistant', got '" +
                              m.role + "'");
    }
  }
  if (request.temperature < 0.0) {
    throw PreconditionError("temperature must be >= 0");
  }
  return chat_->complete(request);
}

std::vector<EmbeddingVector> Gateway::embed(const std::vector<std::string>& texts,
                                            Channel channel) const {
  if (texts.empty()) throw PreconditionError("embed: empty text list");
  for (const auto& t : texts) {
    if (t.empty()) throw PreconditionError("embed: empty string input");
  }
  auto& backend = channel == Channel::Semantic ? *embed_semantic_ : *embed_style_;
  auto out = backend.embed(texts, channel);
  if (out.size() != texts.size()) {
    throw BackendError("embedding backend returned " + std::to_string(out.size()) +
                       " vectors for " + std::to_string(texts.size()) + " inputs");
  }
  for (const auto& v : out) {
    if (v.values.size() != out.front().values.size()) {
      throw BackendError("embedding backend returned inconsistent dimensions");
    }
    for (double x : v.values) {
      if (!std::isfinite(x)) throw BackendError("non-finite embedding entry");
    }
  }
  return out;
}

EmbeddingVector Gateway::embed_one(const std::string& input, Channel channel) const {
  return embed({input}, channel).front();
}

double Gateway::ai_detect(const std::string& input) const {
  if (input.empty()) throw PreconditionError("ai_detect: empty text");
  double p = detector_->ai_detect(input);
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace usp
