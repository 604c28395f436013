#include "usp/http_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "usp/errors.hpp"

namespace usp {

using nlohmann::json;

TokenBucket::TokenBucket(double rate_per_s, double capacity)
    : rate_(rate_per_s),
      capacity_(capacity),
      tokens_(capacity),
      last_refill_(std::chrono::steady_clock::now()) {
  if (rate_ <= 0.0) throw PreconditionError("rate limit must be > 0");
}

void TokenBucket::refill_locked() {
  auto now = std::chrono::steady_clock::now();
  double elapsed = std::chrono::duration<double>(now - last_refill_).count();
  last_refill_ = now;
  tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
}

bool TokenBucket::try_acquire() {
  std::lock_guard<std::mutex> lock(mu_);
  refill_locked();
  if (tokens_ >= 1.0) {
    tokens_ -= 1.0;
    return true;
  }
  return false;
}

void TokenBucket::acquire() {
  for (;;) {
    double deficit;
    {
      std::lock_guard<std::mutex> lock(mu_);
      refill_locked();
      if (tokens_ >= 1.0) {
        tokens_ -= 1.0;
        return;
      }
      deficit = 1.0 - tokens_;
    }
    std::this_thread::sleep_for(
        std::chrono::duration<double>(deficit / rate_));
  }
}

struct HttpBackend::Impl {
  httplib::Client client;
  std::string bearer;
  std::mutex mu;  // httplib::Client is not safe for concurrent use

  explicit Impl(const std::string& scheme_host_port)
      : client(scheme_host_port) {}
};

namespace {

/// Splits "http://host:port/base/path" into the scheme://host:port prefix and
/// the base path.
std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw PreconditionError("endpoint must start with http:// or https://");
  }
  auto path_start = endpoint.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {endpoint, ""};
  std::string base = endpoint.substr(path_start);
  while (!base.empty() && base.back() == '/') base.pop_back();
  return {endpoint.substr(0, path_start), base};
}

bool transient_status(int status) {
  return status == 408 || status == 429 || status >= 500;
}

}  // namespace

HttpBackend::HttpBackend(const BackendConfig& config)
    : config_(config),
      bucket_(config.rate_limit_rps, std::max(1.0, config.rate_limit_rps)) {
  if (config_.retry.max_attempts < 1) {
    throw PreconditionError("retry.max_attempts must be >= 1");
  }
  auto [host, base] = split_endpoint(config_.endpoint);
  base_path_ = base;
  impl_ = std::make_unique<Impl>(host);
  impl_->client.set_connection_timeout(10, 0);
  impl_->client.set_read_timeout(120, 0);
  if (!config_.auth_env.empty()) {
    if (const char* token = std::getenv(config_.auth_env.c_str())) {
      impl_->bearer = token;
    }
  }
}

HttpBackend::~HttpBackend() = default;

std::string HttpBackend::post_json(const std::string& route,
                                   const std::string& body) {
  httplib::Headers headers;
  if (!impl_->bearer.empty()) {
    headers.emplace("Authorization", "Bearer " + impl_->bearer);
  }

  int attempts = 0;
  int last_status = 0;
  std::string last_body;
  bool timed_out = false;
  while (attempts < config_.retry.max_attempts) {
    if (attempts > 0) {
      double delay =
          config_.retry.backoff_base_s * std::pow(2.0, attempts - 1);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    ++attempts;
    bucket_.acquire();

    httplib::Result res;
    {
      std::lock_guard<std::mutex> lock(impl_->mu);
      res = impl_->client.Post(base_path_ + route, headers, body,
                               "application/json");
    }
    if (!res) {
      timed_out = res.error() == httplib::Error::ConnectionTimeout ||
                  res.error() == httplib::Error::Read;
      last_status = 0;
      last_body = httplib::to_string(res.error());
      continue;  // transport error: retry
    }
    last_status = res->status;
    last_body = res->body;
    if (res->status == 200) {
      last_retry_count_ = attempts - 1;
      return res->body;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("authentication rejected (HTTP " +
                      std::to_string(res->status) + ") for " +
                      config_.endpoint + route);
    }
    if (!transient_status(res->status)) {
      throw BackendError(res->status, res->body);
    }
  }

  last_retry_count_ = attempts - 1;
  if (last_status == 429) {
    throw RateLimitedError("rate limited after " + std::to_string(attempts) +
                           " attempts: " + last_body);
  }
  if (timed_out) {
    throw TimeoutError("request timed out after " + std::to_string(attempts) +
                       " attempts");
  }
  throw BackendError(last_status, last_body);
}

std::string HttpBackend::complete(const ChatRequest& request) {
  if (request.messages.empty()) {
    throw PreconditionError("chat request has no messages");
  }
  json body;
  body["model"] = config_.model;
  auto messages = json::array();
  if (request.system) {
    messages.push_back({{"role", "system"}, {"content", *request.system}});
  }
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.text}});
  }
  body["messages"] = std::move(messages);
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  if (request.seed) body["seed"] = *request.seed;

  std::string reply = post_json("/chat", body.dump());
  try {
    auto payload = json::parse(reply);
    return payload.at("choices").at(0).at("message").at("content")
        .get<std::string>();
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed chat response: ") + e.what());
  }
}

std::vector<EmbeddingVector> HttpBackend::embed(
    const std::vector<std::string>& texts, Channel channel) {
  json body;
  body["model"] = config_.model;
  body["input"] = texts;
  body["channel"] = channel_name(channel);

  std::string reply = post_json("/embed", body.dump());
  try {
    auto payload = json::parse(reply);
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (const auto& item : payload.at("data")) {
      EmbeddingVector vec;
      vec.channel = channel;
      vec.normalized = false;
      for (const auto& v : item.at("embedding")) {
        vec.values.push_back(v.get<double>());
      }
      out.push_back(std::move(vec));
    }
    if (out.size() != texts.size()) {
      throw BackendError("embedding count mismatch: expected " +
                         std::to_string(texts.size()) + ", got " +
                         std::to_string(out.size()));
    }
    {
      std::lock_guard<std::mutex> lock(dim_mu_);
      if (!out.empty()) cached_dim_ = out.front().values.size();
    }
    return out;
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed embed response: ") + e.what());
  }
}

double HttpBackend::ai_detect(const std::string& input) {
  json body;
  body["model"] = config_.model;
  body["input"] = input;
  std::string reply = post_json("/detect", body.dump());
  try {
    auto payload = json::parse(reply);
    double p = payload.at("probability").get<double>();
    return std::clamp(p, 0.0, 1.0);
  } catch (const json::exception& e) {
    throw BackendError(std::string("malformed detect response: ") + e.what());
  }
}

std::size_t HttpBackend::embedding_dim() const {
  std::lock_guard<std::mutex> lock(dim_mu_);
  return cached_dim_;
}

}  // namespace usp
