#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

namespace gasp {

// Buffer bookkeeping broke an invariant (duplicate id, dimension mismatch).
struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BufferEntry {
    std::string proposal_id;
    std::vector<double> statement_embedding;
    std::vector<double> code_embedding;
    long global_step = 0;

    nlohmann::json to_json() const;
    static BufferEntry from_json(const nlohmann::json& j);
};

struct NoveltyVerdict {
    bool accepted = true;
    double max_similarity = -1.0;  // -1 sentinel when nothing was compared
    std::optional<std::string> offending_id;
};

// dot(u,v)/(|u||v|). Equal nonzero dimensions required.
double cosine_similarity(std::span<const double> u, std::span<const double> v);

// One global buffer (lemma or lift): append-only within a run, integrity-
// checked ids, reads concurrent with serialized appends.
class ProposalBuffer {
public:
    void append(std::vector<BufferEntry> entries, long global_step);
    std::size_t size() const;
    std::vector<BufferEntry> snapshot() const;

    // Drops entries back to the first `keep` (iteration rollback support).
    void truncate(std::size_t keep);

    // Max channelwise similarity of the candidate against stored entries.
    void max_similarity(const BufferEntry& candidate, double& best,
                        std::string& best_id) const;

    void save_jsonl(const std::filesystem::path& path) const;
    // Appends the snapshot's entries into this buffer, keeping their steps.
    void load_jsonl(const std::filesystem::path& path);

private:
    std::vector<BufferEntry> entries_;
    std::unordered_set<std::string> ids_;
    mutable std::shared_mutex mu_;
};

struct GlobalBuffers {
    ProposalBuffer lemma;
    ProposalBuffer lift;
};

// Rejects a candidate whose statement-vs-statement or code-vs-code cosine
// similarity strictly exceeds the threshold against any entry in either
// global buffer or in the pending local batch. Equality at the threshold is
// accepted.
NoveltyVerdict novelty_check(const BufferEntry& candidate,
                             const GlobalBuffers& buffers, double threshold,
                             std::span<const BufferEntry> pending = {});

// Mean over the batch of the mean complement of statement-channel cosine
// similarity against the buffer. Empty buffer -> undefined (nullopt); the
// first iteration has nothing to compare against.
std::optional<double> buffer_dissimilarity(std::span<const BufferEntry> batch,
                                           std::span<const BufferEntry> buffer);

}  // namespace gasp
