#include "verifai/embed.hpp"

#include <cmath>
#include <cstdlib>
#include <semaphore>

#include "http_client.hpp"
#include "verifai/digest.hpp"
#include "verifai/error.hpp"
#include "verifai/tokenize.hpp"

namespace verifai {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    const auto n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) {
    return std::sqrt(dot(v, v));
}

namespace {

// Returns false (leaving v untouched) when v is the zero vector.
bool normalize(std::vector<double>& v) {
    const double n = l2_norm(v);
    if (n == 0.0) return false;
    for (auto& x : v) x /= n;
    return true;
}

void add_feature(std::vector<double>& v, std::string_view feature) {
    const std::uint64_t h = feature_hash(feature);
    v[h % v.size()] += (h >> 63) ? -1.0 : 1.0;
}

}  // namespace

Embedding Embedder::embed_one(std::string_view text) const {
    auto out = embed({std::string(text)});
    return std::move(out.at(0));
}

Embedding embed_text(std::string_view text, std::size_t dim) {
    Embedding e;
    e.values.assign(dim, 0.0);
    const auto tokens = tokenize(text);
    std::string bigram;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        add_feature(e.values, tokens[i]);
        if (i + 1 < tokens.size()) {
            bigram.assign(tokens[i]);
            bigram += ' ';
            bigram += tokens[i + 1];
            add_feature(e.values, bigram);
        }
    }
    if (!normalize(e.values)) {
        std::fill(e.values.begin(), e.values.end(), 0.0);
        e.empty = true;
    }
    return e;
}

std::vector<double> token_vector(std::string_view token, std::size_t dim, std::size_t spread) {
    std::vector<double> v(dim, 0.0);
    std::string key;
    for (std::size_t j = 0; j < spread; ++j) {
        key.assign(token);
        key += '#';
        key += std::to_string(j);
        add_feature(v, key);
    }
    if (!normalize(v)) v[feature_hash(token) % dim] = 1.0;  // all spread coordinates cancelled
    return v;
}

TokenEmbeddingMatrix embed_tokens(std::string_view text, std::size_t dim, std::size_t spread) {
    TokenEmbeddingMatrix m;
    m.dim = dim;
    m.tokens = tokenize(text);
    m.data.reserve(m.tokens.size() * dim);
    for (const auto& t : m.tokens) {
        const auto v = token_vector(t, dim, spread);
        m.data.insert(m.data.end(), v.begin(), v.end());
    }
    return m;
}

HashedTextEmbedder::HashedTextEmbedder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ContractError("embedding dimension must be positive");
}

std::string HashedTextEmbedder::tag() const {
    return "hashed-fnv1a64fmix-unibigram-d" + std::to_string(dim_);
}

std::vector<Embedding> HashedTextEmbedder::embed(const std::vector<std::string>& texts) const {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_text(t, dim_));
    return out;
}

// --- external service --------------------------------------------------------

namespace {

std::optional<std::string> resolve_token(const std::optional<std::string>& configured, const char* env) {
    if (configured) return configured;
    if (const char* v = std::getenv(env)) return std::string(v);
    return std::nullopt;
}

}  // namespace

std::vector<Embedding> external_embed(const ExternalEmbedConfig& config, const std::vector<std::string>& texts) {
    if (texts.empty()) return {};
    const nlohmann::json request = {{"model", config.model}, {"inputs", texts}};
    std::vector<Embedding> out;
    try {
        detail::post_json(config.endpoint, request, resolve_token(config.token, "VERIFAI_EMBED_TOKEN"),
                          {config.max_attempts, config.backoff, config.timeout}, [&](const nlohmann::json& body) {
                              const auto& rows = body.at("vectors");
                              if (!rows.is_array() || rows.size() != texts.size()) {
                                  throw detail::HttpFailure("expected " + std::to_string(texts.size()) +
                                                            " vectors, got " +
                                                            std::to_string(rows.is_array() ? rows.size() : 0));
                              }
                              std::vector<Embedding> parsed;
                              parsed.reserve(rows.size());
                              for (const auto& row : rows) {
                                  Embedding e;
                                  e.values = row.get<std::vector<double>>();
                                  if (!normalize(e.values)) e.empty = true;
                                  parsed.push_back(std::move(e));
                              }
                              out = std::move(parsed);
                          });
    } catch (const detail::HttpFailure& e) {
        throw EmbedServiceError(std::string("embedding service: ") + e.what());
    }
    return out;
}

struct ExternalEmbedder::Gate {
    explicit Gate(std::size_t n) : slots(static_cast<std::ptrdiff_t>(n)) {}
    std::counting_semaphore<> slots;
};

ExternalEmbedder::ExternalEmbedder(ExternalEmbedConfig config, std::size_t dim)
    : config_(std::move(config)), dim_(dim), gate_(std::make_unique<Gate>(std::max<std::size_t>(1, config_.max_in_flight))) {}

ExternalEmbedder::~ExternalEmbedder() = default;

std::string ExternalEmbedder::tag() const {
    return "external:" + config_.model + ":d" + std::to_string(dim_);
}

std::vector<Embedding> ExternalEmbedder::embed(const std::vector<std::string>& texts) const {
    gate_->slots.acquire();
    std::vector<Embedding> out;
    try {
        out = external_embed(config_, texts);
    } catch (...) {
        gate_->slots.release();
        throw;
    }
    gate_->slots.release();
    for (const auto& e : out) {
        if (e.dim() != dim_) {
            throw EmbedServiceError("embedding service returned dim " + std::to_string(e.dim()) + ", expected " +
                                    std::to_string(dim_));
        }
    }
    return out;
}

}  // namespace verifai
