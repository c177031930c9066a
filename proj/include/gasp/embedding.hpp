#pragma once

#include <string_view>
#include <vector>

namespace gasp {

class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(std::string_view text) = 0;
    virtual int dimension() const = 0;
};

// Deterministic token-hashing embedder for tests and offline runs: lowercased
// alphanumeric tokens, unigrams + bigrams, signed feature hashing into a
// fixed-dimension vector, L2 normalized. Identical text embeds identically
// on every platform; unrelated text lands near orthogonal.
class FeatureHashEmbedder final : public Embedder {
public:
    explicit FeatureHashEmbedder(int dim = 256) : dim_(dim) {}
    std::vector<double> embed(std::string_view text) override;
    int dimension() const override { return dim_; }

private:
    int dim_;
};

}  // namespace gasp
