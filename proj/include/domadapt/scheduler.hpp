#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"
#include "domadapt/rng.hpp"

namespace domadapt {

/// Interleaving policy: each cycle is n_out out-of-domain batches followed
/// by n_in in-domain batches.
struct BatchWeightingSchedule {
    std::size_t n_in = 1;
    std::size_t n_out = 30;
    std::size_t batch_size = 32;

    std::size_t cycle_length() const { return n_in + n_out; }

    void validate() const {
        if (n_in + n_out == 0) throw Error("schedule: n_in + n_out must be >= 1");
        if (batch_size == 0) throw Error("schedule: batch_size must be >= 1");
    }
};

/// Out-of-domain sentence ratio N_out / (N_out + N_in).
inline double r_out(const BatchWeightingSchedule& s) {
    if (s.n_in + s.n_out == 0) throw Error("r_out: n_in and n_out are both zero");
    return static_cast<double>(s.n_out) / static_cast<double>(s.n_out + s.n_in);
}

struct Batch {
    std::size_t ordinal = 0;
    Domain origin = Domain::InDomain;
    /// Positions in the origin corpus.
    std::vector<std::size_t> indices;

    bool operator==(const Batch&) const = default;
};

/// Draws batches from one corpus in seeded-shuffle order. A batch never
/// spans two passes, so the last batch of a pass may be short; every pass
/// is reshuffled.
class EpochSampler {
public:
    EpochSampler(std::size_t corpus_size, std::uint64_t seed) : size_(corpus_size), rng_(seed) {}

    std::vector<std::size_t> next(std::size_t batch_size) {
        if (pos_ >= order_.size()) {
            order_ = iota_indices(size_);
            rng_.shuffle(order_);
            pos_ = 0;
            ++epoch_;
        }
        const std::size_t end = std::min(order_.size(), pos_ + batch_size);
        std::vector<std::size_t> out(order_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                     order_.begin() + static_cast<std::ptrdiff_t>(end));
        pos_ = end;
        return out;
    }

    std::size_t epoch() const { return epoch_; }

private:
    std::size_t size_;
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t pos_ = 0;
    std::size_t epoch_ = 0;
};

/// Lazy, single-consumer batch stream.
class BatchStream {
public:
    BatchStream(const BatchWeightingSchedule& schedule, std::size_t in_size, std::size_t out_size, std::uint64_t seed)
        : schedule_(schedule),
          in_(in_size, Rng::derive(seed, 1)),
          out_(out_size, Rng::derive(seed, 2)) {
        schedule_.validate();
        if (schedule_.n_in > 0 && in_size == 0) throw Error("build_stream: in-domain corpus is empty");
        if (schedule_.n_out > 0 && out_size == 0) throw Error("build_stream: out-of-domain corpus is empty");
    }

    Batch next() {
        Batch b;
        b.ordinal = ordinal_++;
        const std::size_t slot = b.ordinal % schedule_.cycle_length();
        b.origin = slot < schedule_.n_out ? Domain::OutOfDomain : Domain::InDomain;
        b.indices = (b.origin == Domain::OutOfDomain ? out_ : in_).next(schedule_.batch_size);
        return b;
    }

private:
    BatchWeightingSchedule schedule_;
    EpochSampler in_;
    EpochSampler out_;
    std::size_t ordinal_ = 0;
};

inline std::vector<Batch> build_stream(const BatchWeightingSchedule& schedule, const Corpus& in_corpus,
                                       const Corpus& out_corpus, long long total_batches, std::uint64_t seed) {
    if (total_batches < 0) throw Error("build_stream: total_batches must be >= 0");
    BatchStream stream(schedule, in_corpus.size(), out_corpus.size(), seed);
    std::vector<Batch> out;
    out.reserve(static_cast<std::size_t>(total_batches));
    for (long long i = 0; i < total_batches; ++i) out.push_back(stream.next());
    return out;
}

/// "ordinal<TAB>in|out<TAB>comma-separated indices" per batch.
inline std::string stream_manifest(const std::vector<Batch>& batches) {
    std::string out;
    for (const auto& b : batches) {
        out += std::to_string(b.ordinal);
        out += '\t';
        out += to_string(b.origin);
        out += '\t';
        for (std::size_t i = 0; i < b.indices.size(); ++i) {
            if (i) out += ',';
            out += std::to_string(b.indices[i]);
        }
        out += '\n';
    }
    return out;
}

}  // namespace domadapt
