#include "gasp/buffers.hpp"

#include <cmath>
#include <fstream>
#include <mutex>

namespace gasp {

using nlohmann::json;

json BufferEntry::to_json() const {
    return {{"proposal_id", proposal_id},
            {"statement_embedding", statement_embedding},
            {"code_embedding", code_embedding},
            {"global_step", global_step}};
}

BufferEntry BufferEntry::from_json(const json& j) {
    BufferEntry e;
    e.proposal_id = j.at("proposal_id").get<std::string>();
    e.statement_embedding = j.at("statement_embedding").get<std::vector<double>>();
    e.code_embedding = j.at("code_embedding").get<std::vector<double>>();
    e.global_step = j.at("global_step").get<long>();
    return e;
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::domain_error("cosine_similarity: dimension mismatch");
    if (u.empty()) throw std::domain_error("cosine_similarity: empty vectors");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0)
        throw std::domain_error("cosine_similarity: zero vector");
    return dot / (std::sqrt(nu) * std::sqrt(nv));
}

namespace {

// Channelwise max similarity of candidate vs one stored entry.
void entry_similarity(const BufferEntry& candidate, const BufferEntry& stored,
                      double& best, std::string& best_id) {
    if (candidate.statement_embedding.size() != stored.statement_embedding.size() ||
        candidate.code_embedding.size() != stored.code_embedding.size())
        throw IntegrityError("novelty_check: embedding dimension mismatch with entry " +
                             stored.proposal_id);
    const double s = cosine_similarity(candidate.statement_embedding,
                                       stored.statement_embedding);
    const double c =
        cosine_similarity(candidate.code_embedding, stored.code_embedding);
    const double m = std::max(s, c);
    if (m > best) {
        best = m;
        best_id = stored.proposal_id;
    }
}

}  // namespace

namespace {

bool all_finite(const std::vector<double>& v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace

void ProposalBuffer::append(std::vector<BufferEntry> entries, long global_step) {
    std::unique_lock lock(mu_);
    for (const BufferEntry& e : entries) {
        if (!all_finite(e.statement_embedding) || !all_finite(e.code_embedding))
            throw IntegrityError("non-finite embedding for " + e.proposal_id);
        if (!ids_.insert(e.proposal_id).second)
            throw IntegrityError("duplicate proposal id: " + e.proposal_id);
    }
    for (BufferEntry& e : entries) {
        e.global_step = global_step;
        entries_.push_back(std::move(e));
    }
}

std::size_t ProposalBuffer::size() const {
    std::shared_lock lock(mu_);
    return entries_.size();
}

std::vector<BufferEntry> ProposalBuffer::snapshot() const {
    std::shared_lock lock(mu_);
    return entries_;
}

void ProposalBuffer::truncate(std::size_t keep) {
    std::unique_lock lock(mu_);
    while (entries_.size() > keep) {
        ids_.erase(entries_.back().proposal_id);
        entries_.pop_back();
    }
}

void ProposalBuffer::max_similarity(const BufferEntry& candidate, double& best,
                                    std::string& best_id) const {
    std::shared_lock lock(mu_);
    for (const BufferEntry& e : entries_) entry_similarity(candidate, e, best, best_id);
}

void ProposalBuffer::save_jsonl(const std::filesystem::path& path) const {
    std::shared_lock lock(mu_);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write buffer snapshot: " + path.string());
    for (const BufferEntry& e : entries_) out << e.to_json().dump() << '\n';
}

void ProposalBuffer::load_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open buffer snapshot: " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        BufferEntry e = BufferEntry::from_json(json::parse(line));
        const long step = e.global_step;
        append({std::move(e)}, step);
    }
}

NoveltyVerdict novelty_check(const BufferEntry& candidate,
                             const GlobalBuffers& buffers, double threshold,
                             std::span<const BufferEntry> pending) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw std::invalid_argument("novelty threshold must lie in (0,1]");
    if (candidate.statement_embedding.empty() || candidate.code_embedding.empty())
        throw std::invalid_argument("novelty_check: candidate embeddings missing");

    double best = -1.0;
    std::string best_id;
    buffers.lemma.max_similarity(candidate, best, best_id);
    buffers.lift.max_similarity(candidate, best, best_id);
    for (const BufferEntry& e : pending) entry_similarity(candidate, e, best, best_id);

    NoveltyVerdict v;
    v.max_similarity = best;
    v.accepted = !(best > threshold);  // strictly exceeding rejects
    if (!v.accepted) v.offending_id = best_id;
    return v;
}

std::optional<double> buffer_dissimilarity(std::span<const BufferEntry> batch,
                                           std::span<const BufferEntry> buffer) {
    if (buffer.empty()) return std::nullopt;
    if (batch.empty()) return std::nullopt;
    double outer = 0.0;
    for (const BufferEntry& x : batch) {
        double inner = 0.0;
        for (const BufferEntry& y : buffer)
            inner += 1.0 - cosine_similarity(x.statement_embedding, y.statement_embedding);
        outer += inner / static_cast<double>(buffer.size());
    }
    return outer / static_cast<double>(batch.size());
}

}  // namespace gasp
