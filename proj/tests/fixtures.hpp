#pragma once

// Synthetic corpora and scratch directories shared by the test binaries.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "domadapt/corpus.hpp"
#include "domadapt/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "test") {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("domadapt-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& name) const { return path_ / name; }

private:
    fs::path path_;
};

inline void write_lines(const fs::path& path, const std::vector<std::string>& lines) {
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    domadapt::write_file(path, text);
}

/// Zipf-like draw over [0, n).
inline std::size_t zipf(domadapt::Rng& rng, std::size_t n) {
    double total = 0;
    for (std::size_t r = 0; r < n; ++r) total += 1.0 / static_cast<double>(r + 1);
    double u = rng.uniform() * total;
    for (std::size_t r = 0; r < n; ++r) {
        u -= 1.0 / static_cast<double>(r + 1);
        if (u <= 0) return r;
    }
    return n - 1;
}

inline std::string sentence_over(domadapt::Rng& rng, const std::vector<std::string>& vocab, std::size_t min_len = 5,
                                 std::size_t max_len = 15) {
    const std::size_t len = min_len + static_cast<std::size_t>(rng.below(max_len - min_len + 1));
    std::string s;
    for (std::size_t i = 0; i < len; ++i) {
        if (i) s += ' ';
        s += vocab[zipf(rng, vocab.size())];
    }
    return s;
}

/// IO-scenario data: L2 in-domain text, an L1 out-of-domain pool mixing
/// in-domain-like and out-of-domain-like sentences, and an L2->L1 lexicon.
///
/// Two vocabularies of `vocab_size` tokens, one per domain: "in<k>" and
/// "out<k>". The last `shared` in-domain tokens are also out-of-domain
/// tokens ("sh<k>"), ranked least frequent in-domain and most frequent
/// out-of-domain. L2 in-domain text and the in-domain-like L1 sentences draw
/// from the same in-domain distribution. The lexicon only covers the
/// placeholder word "l2only", so back-translation is the identity
/// fallback on every real token.
struct TwoDomainData {
    std::vector<std::string> l2_in;
    std::vector<std::string> l1_out;
    std::vector<bool> l1_out_in_like;
    std::vector<std::string> lexicon;
    std::size_t in_like_count = 0;
};

inline TwoDomainData make_two_domain(std::size_t per_domain, std::size_t vocab_size, std::size_t shared,
                                     std::uint64_t seed) {
    domadapt::Rng rng(seed);
    std::vector<std::string> in, out;
    for (std::size_t k = 0; k < vocab_size - shared; ++k) {
        in.push_back("in" + std::to_string(k));
        out.push_back("out" + std::to_string(k));
    }
    std::vector<std::string> shared_tokens;
    for (std::size_t k = 0; k < shared; ++k) shared_tokens.push_back("sh" + std::to_string(k));
    in.insert(in.end(), shared_tokens.begin(), shared_tokens.end());
    out.insert(out.begin(), shared_tokens.begin(), shared_tokens.end());

    TwoDomainData d;
    d.lexicon.push_back("l2only\tl1only");
    for (std::size_t i = 0; i < per_domain; ++i) d.l2_in.push_back(sentence_over(rng, in));

    std::vector<std::pair<std::string, bool>> pool;
    for (std::size_t i = 0; i < per_domain; ++i) pool.emplace_back(sentence_over(rng, in), true);
    for (std::size_t i = 0; i < per_domain; ++i) pool.emplace_back(sentence_over(rng, out), false);
    rng.shuffle(pool);
    for (auto& [s, in_like] : pool) {
        d.l1_out.push_back(std::move(s));
        d.l1_out_in_like.push_back(in_like);
        d.in_like_count += in_like;
    }
    return d;
}

/// Writes the IO manifest, lexicon and pipeline config; returns the config path.
inline fs::path write_io_fixture(const fs::path& dir, const TwoDomainData& d, std::size_t k, std::size_t merges = 2000) {
    write_lines(dir / "de.in.txt", d.l2_in);
    write_lines(dir / "en.out.txt", d.l1_out);
    write_lines(dir / "lexicon.tsv", d.lexicon);
    domadapt::write_file(dir / "manifest.json",
                         R"({"languages": {"L1": "en", "L2": "de"},
  "corpora": {"L2_in": "de.in.txt", "L1_out": "en.out.txt"}})");
    domadapt::write_file(dir / "config.json", R"({
  "manifest": "manifest.json",
  "output_dir": "out",
  "seed": 0,
  "bpe": {"merges": )" + std::to_string(merges) + R"(},
  "lm": {"order": 4, "alpha": 0.1},
  "schedule": {"n_in": 1, "n_out": 30, "batch_size": 32},
  "selection": {"k": )" + std::to_string(k) + R"(},
  "translator": {"kind": "dictionary", "lexicon": "lexicon.tsv"}
})");
    return dir / "config.json";
}

}  // namespace fixtures
