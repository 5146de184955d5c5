#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace verifai {

/// Unit-norm vector, or the zero vector flagged `empty` when the input had no
/// content.
struct Embedding {
    std::vector<double> values;
    bool empty = false;

    std::size_t dim() const noexcept { return values.size(); }
    bool operator==(const Embedding&) const = default;
};

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

/// One unit row per token, row-major.
struct TokenEmbeddingMatrix {
    std::size_t dim = 0;
    std::vector<std::string> tokens;
    std::vector<double> data;

    std::size_t rows() const noexcept { return tokens.size(); }
    bool empty() const noexcept { return tokens.empty(); }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

/// Document-level embedding provider.
class Embedder {
public:
    virtual ~Embedder() = default;

    /// Identifies the provider and its parameters; persisted with indexes.
    virtual std::string tag() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<Embedding> embed(const std::vector<std::string>& texts) const = 0;

    Embedding embed_one(std::string_view text) const;
};

inline constexpr std::size_t kTextEmbeddingDim = 256;
inline constexpr std::size_t kTokenEmbeddingDim = 64;
inline constexpr std::size_t kTokenSpread = 4;

/// Feature-hashed bag of unigrams and bigrams. Each feature string (a token,
/// or two adjacent tokens joined by one space) is hashed with feature_hash;
/// bucket = h mod dim, sign = -1 when bit 63 of h is set. Weights are term
/// frequencies; the result is L2-normalized.
Embedding embed_text(std::string_view text, std::size_t dim = kTextEmbeddingDim);

/// Unit vector for one token: `spread` signed one-hot coordinates, the j-th
/// hashed from "<token>#<j>", summed and normalized.
std::vector<double> token_vector(std::string_view token, std::size_t dim = kTokenEmbeddingDim,
                                 std::size_t spread = kTokenSpread);

TokenEmbeddingMatrix embed_tokens(std::string_view text, std::size_t dim = kTokenEmbeddingDim,
                                  std::size_t spread = kTokenSpread);

class HashedTextEmbedder final : public Embedder {
public:
    explicit HashedTextEmbedder(std::size_t dim = kTextEmbeddingDim);

    std::string tag() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) const override;

private:
    std::size_t dim_;
};

struct ExternalEmbedConfig {
    std::string endpoint;  // http(s)://host[:port]/path
    std::string model = "default";
    std::optional<std::string> token;  // falls back to VERIFAI_EMBED_TOKEN
    int max_attempts = 3;
    std::chrono::milliseconds backoff{100};  // doubles after each failure
    std::chrono::milliseconds timeout{30000};
    std::size_t max_in_flight = 8;
};

/// POSTs {model, inputs} and expects {vectors} with one row per input.
/// Vectors are re-normalized locally. Throws EmbedServiceError.
std::vector<Embedding> external_embed(const ExternalEmbedConfig& config, const std::vector<std::string>& texts);

class ExternalEmbedder final : public Embedder {
public:
    /// `dim` is the dimension the service is expected to return.
    ExternalEmbedder(ExternalEmbedConfig config, std::size_t dim);
    ~ExternalEmbedder() override;

    std::string tag() const override;
    std::size_t dim() const override { return dim_; }
    std::vector<Embedding> embed(const std::vector<std::string>& texts) const override;

private:
    struct Gate;
    ExternalEmbedConfig config_;
    std::size_t dim_;
    std::unique_ptr<Gate> gate_;
};

}  // namespace verifai
