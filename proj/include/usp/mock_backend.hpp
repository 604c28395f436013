#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usp/gateway.hpp"

namespace usp {

/// Deterministic offline backend. Every reply is a pure function of the
/// request content and the configured seed, so full pipeline runs are
/// bitwise-reproducible across runs and platforms.
///
/// Chat replies are content-driven: the engine recognizes the prompt family by
/// its template markers (attribute extraction, narrative polishing, NLI
/// judging, fact decomposition, judge scoring, user-role simulation) and
/// produces a well-formed reply for it. NLI requests are answered with the
/// substring oracle: Consistent exactly when the normalized target text occurs
/// verbatim inside the normalized source text.
///
/// Embeddings are a seeded pseudo-random projection of character trigram
/// counts onto `dim` axes, then L2-normalized; the style channel uses the same
/// construction under a different seed. The AI detector answers 0.9 for text
/// containing the marker token "AI_STYLE" and 0.1 otherwise.
class MockBackend : public Backend {
 public:
  explicit MockBackend(std::uint64_t seed = 0, std::size_t dim = 64);

  std::string complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     Channel channel) override;
  double ai_detect(const std::string& text) override;
  std::size_t embedding_dim() const override { return dim_; }

  EmbeddingVector embed_one(const std::string& text, Channel channel) const;

  /// Parses "mock:" endpoints, e.g. "mock:" or "mock:seed=7,dim=32".
  static MockBackend from_endpoint(const std::string& endpoint);

 private:
  std::uint64_t seed_;
  std::size_t dim_;
};

/// Replays a fixed list of chat replies in order; embeddings and detection
/// fall through to MockBackend behaviour. Intended for tests that need exact
/// backend outputs.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(std::vector<std::string> replies,
                           bool cycle = false, std::uint64_t seed = 0,
                           std::size_t dim = 64);

  std::string complete(const ChatRequest& request) override;
  std::vector<EmbeddingVector> embed(const std::vector<std::string>& texts,
                                     Channel channel) override;
  double ai_detect(const std::string& text) override;
  std::size_t embedding_dim() const override { return fallback_.embedding_dim(); }

  std::size_t calls() const { return next_; }

 private:
  std::vector<std::string> replies_;
  std::size_t next_ = 0;
  bool cycle_;
  MockBackend fallback_;
};

}  // namespace usp
