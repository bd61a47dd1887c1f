#pragma once

#include <array>
#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <future>
#include <list>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "fomo/gridworld/env.hpp"

namespace fomo::embed {

struct EmbeddingVector {
  std::vector<float> values;
  size_t dim() const { return values.size(); }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

// Remote failures after retries are exhausted (connect, timeout, framing).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The service answered with {"error": code, "detail": text} or malformed JSON.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& detail)
      : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// The embedding dimension changed after the first response. Not retried.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Digest = std::array<uint8_t, 32>;

Digest sha256(const uint8_t* data, size_t size);
std::string base64_encode(const std::vector<uint8_t>& bytes);
std::vector<uint8_t> base64_decode(const std::string& text);

// ---------------------------------------------------------------------------
// Surrogate: deterministic hand-built features projected to `dim` by a fixed
// seeded Gaussian matrix.

struct SurrogateOptions {
  int dim = 1024;
  uint64_t projection_seed = 0x5eed;
  // Include the agent's (x, y) one-hot. Without it, moving along a uniform
  // corridor leaves the features unchanged.
  bool position_features = true;
};

class SurrogateEmbedder {
 public:
  explicit SurrogateEmbedder(SurrogateOptions options = {});

  static constexpr int kTypes = 11;   // compact object ids incl. unseen/agent
  static constexpr int kColors = 6;
  static constexpr int kMaxCoord = 32;

  int feature_size() const;
  std::vector<float> features(const grid::Observation& obs, grid::Scope scope) const;
  EmbeddingVector embed(const grid::Observation& obs, grid::Scope scope) const;
  int dim() const { return options_.dim; }

 private:
  SurrogateOptions options_;
  std::vector<float> projection_;  // feature_size x dim, row-major
};

// ---------------------------------------------------------------------------

// Bounded LRU map from digest to vector. Thread-safe.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(size_t capacity = 100000) : capacity_(capacity) {}

  bool get(const Digest& key, EmbeddingVector& out);
  void put(const Digest& key, const EmbeddingVector& value);
  size_t size() const;
  size_t hits() const;
  size_t misses() const;

 private:
  struct DigestHash {
    size_t operator()(const Digest& d) const {
      size_t h;
      std::memcpy(&h, d.data(), sizeof(h));
      return h;
    }
  };
  using Entry = std::pair<Digest, EmbeddingVector>;

  size_t capacity_;
  mutable std::mutex mu_;
  std::list<Entry> order_;  // front = most recently used
  std::unordered_map<Digest, std::list<Entry>::iterator, DigestHash> index_;
  size_t hits_ = 0, misses_ = 0;
};

// ---------------------------------------------------------------------------
// Remote service client.

struct RemoteOptions {
  int max_retries = 3;
  int backoff_ms = 100;          // doubled after each failed attempt
  int timeout_ms = 10000;        // per request
  int batch_window_us = 2000;    // coalescing window after the first request
  size_t max_batch = 64;
};

// Address forms: "tcp://host:port" or "host:port" (length-prefixed JSON over
// a stream socket), "http://host:port" (POST /embed_image, /embed_batch).
class RemoteClient {
 public:
  RemoteClient(const std::string& address, RemoteOptions options = {});
  ~RemoteClient();
  RemoteClient(const RemoteClient&) = delete;
  RemoteClient& operator=(const RemoteClient&) = delete;

  // Blocking; concurrent callers are coalesced into embed_batch requests.
  EmbeddingVector embed_png(const std::vector<uint8_t>& png);
  // One embed_batch request, no coalescing.
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::vector<uint8_t>>& pngs);

  // 0 until the first successful response.
  size_t dim() const;
  size_t requests_sent() const;

 private:
  struct Pending {
    std::vector<uint8_t> png;
    std::promise<EmbeddingVector> result;
  };

  // Sends one request, retrying transport failures; returns the parsed reply
  // or throws ProtocolError for an error reply.
  std::string round_trip(const std::string& op, const std::string& body);
  std::string tcp_exchange(const std::string& body);
  void close_socket();
  void check_dim(size_t d);
  void dispatch_loop();

  enum class Kind { kTcp, kHttp } kind_;
  std::string host_;
  int port_ = 0;
  RemoteOptions options_;

  std::mutex io_mu_;
  int sock_ = -1;

  mutable std::mutex dim_mu_;
  size_t dim_ = 0;
  std::atomic<size_t> requests_{0};

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::unique_ptr<Pending>> queue_;
  bool stopping_ = false;
  std::thread dispatcher_;
};

// ---------------------------------------------------------------------------

// Embedding provider used by the intrinsic-reward module. Surrogate embeds the
// compact encoding; remote embeds the PNG of the RGB raster for the scope.
// Both cache by digest of the bytes they embed.
class EmbedderBackend {
 public:
  enum class Kind { kSurrogate, kRemote };

  static std::shared_ptr<EmbedderBackend> surrogate(SurrogateOptions options = {},
                                                    size_t cache_capacity = 100000);
  static std::shared_ptr<EmbedderBackend> remote(const std::string& address,
                                                 RemoteOptions options = {},
                                                 size_t cache_capacity = 100000);
  // "surrogate" or "remote:<address>".
  static std::shared_ptr<EmbedderBackend> from_string(const std::string& spec);

  Kind kind() const { return kind_; }
  // Surrogate: configured dim. Remote: 0 until the first response.
  size_t dim() const;
  bool needs_rgb() const { return kind_ == Kind::kRemote; }

  EmbeddingVector embed(const grid::Observation& obs, grid::Scope scope);
  // Remote only; surrogate has no image path (throws std::logic_error).
  EmbeddingVector embed_png(const std::vector<uint8_t>& png);

  void set_cache_enabled(bool enabled) { cache_enabled_ = enabled; }
  const EmbeddingCache& cache() const { return cache_; }

 private:
  EmbedderBackend(Kind kind, size_t cache_capacity) : kind_(kind), cache_(cache_capacity) {}

  Kind kind_;
  std::unique_ptr<SurrogateEmbedder> surrogate_;
  std::unique_ptr<RemoteClient> remote_;
  EmbeddingCache cache_;
  bool cache_enabled_ = true;
};

}  // namespace fomo::embed
