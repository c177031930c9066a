#include "gasp/embedding.hpp"

#include <cctype>
#include <cmath>
#include <string>

#include "gasp/rng.hpp"

namespace gasp {

std::vector<double> FeatureHashEmbedder::embed(std::string_view text) {
    std::vector<double> v(dim_, 0.0);
    auto add = [&](std::string_view feature) {
        const std::uint64_t h = fnv1a64(feature);
        const double sign = (h >> 63) ? 1.0 : -1.0;
        v[h % static_cast<std::uint64_t>(dim_)] += sign;
    };

    std::string prev;
    std::string tok;
    auto emit = [&](const std::string& t) {
        add(t);
        if (!prev.empty()) add(prev + " " + t);
        prev = t;
    };
    auto flush = [&] {
        if (tok.empty()) return;
        emit(tok);
        tok.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            tok.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else {
            flush();
            // Punctuation and operator characters are tokens of their own, so
            // code embeds on structure as well as identifiers.
            if (!std::isspace(static_cast<unsigned char>(c))) emit(std::string(1, c));
        }
    }
    flush();

    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
    }
    return v;
}

}  // namespace gasp
