#include <gtest/gtest.h>

#include <cmath>

#include "domadapt/eval.hpp"
#include "domadapt/rng.hpp"
#include "fixtures.hpp"
#include "oracle.hpp"

using namespace domadapt;

namespace {

std::vector<Sentence> sents(std::vector<std::string> text) {
    std::vector<Sentence> out;
    for (const auto& t : text) out.push_back(make_sentence(t));
    return out;
}

double bleu(std::vector<std::string> hyp, std::vector<std::string> ref) {
    const auto h = sents(std::move(hyp));
    const auto r = sents(std::move(ref));
    return corpus_bleu(h, r).bleu;
}

}  // namespace

TEST(CorpusBleu, IdentityIsHundred) {
    const auto s = sents({"the cat sat on the mat", "a b c d e f"});
    const auto r = corpus_bleu(s, s);
    EXPECT_DOUBLE_EQ(r.bleu, 100.0);
    EXPECT_DOUBLE_EQ(r.brevity_penalty, 1.0);
}

// precisions 4/4 3/3 2/2 1/1, BP = exp(1 - 5/4).
TEST(CorpusBleu, ShortHypothesisByHand) {
    const auto h = sents({"a b c d"});
    const auto r = sents({"a b c d e"});
    const auto rep = corpus_bleu(h, r);
    EXPECT_NEAR(rep.brevity_penalty, std::exp(-0.25), 1e-12);
    EXPECT_NEAR(rep.bleu, 77.88, 0.01);
    EXPECT_EQ(rep.matches, (std::array<std::size_t, 4>{4, 3, 2, 1}));
    EXPECT_EQ(rep.summary().substr(0, 13), "BLEU = 77.88,");
}

TEST(CorpusBleu, NoFourGramOverlapIsZero) {
    EXPECT_EQ(bleu({"a b c d e"}, {"a b c x d e"}), 0.0);
    EXPECT_EQ(bleu({"a b c"}, {"a b c"}), 0.0);  // no 4-grams at all
}

TEST(CorpusBleu, CaseSensitive) {
    EXPECT_LT(bleu({"The Cat sat on the mat"}, {"the cat sat on the mat"}), 100.0);
}

TEST(CorpusBleu, OrderInvariantAndBounded) {
    Rng rng(2);
    const std::vector<std::string> vocab{"a", "b", "c", "d", "e", "f"};
    std::vector<Sentence> h, r;
    for (int i = 0; i < 40; ++i) {
        h.push_back(make_sentence(fixtures::sentence_over(rng, vocab, 3, 12)));
        r.push_back(make_sentence(fixtures::sentence_over(rng, vocab, 3, 12)));
    }
    const auto base = corpus_bleu(h, r);
    EXPECT_GE(base.bleu, 0.0);
    EXPECT_LE(base.bleu, 100.0);
    EXPECT_GT(base.brevity_penalty, 0.0);
    EXPECT_LE(base.brevity_penalty, 1.0);
    std::vector<std::size_t> perm = iota_indices(h.size());
    rng.shuffle(perm);
    std::vector<Sentence> hp, rp;
    for (std::size_t i : perm) {
        hp.push_back(h[i]);
        rp.push_back(r[i]);
    }
    EXPECT_DOUBLE_EQ(corpus_bleu(hp, rp).bleu, base.bleu);
}

TEST(CorpusBleu, AgreesWithClippedCountOracle) {
    Rng rng(8);
    const std::vector<std::string> vocab{"x", "y", "z", "w"};
    std::vector<Sentence> h, r;
    std::array<std::size_t, 4> m{}, t{};
    std::size_t hl = 0, rl = 0;
    for (int i = 0; i < 20; ++i) {
        h.push_back(make_sentence(fixtures::sentence_over(rng, vocab, 4, 14)));
        r.push_back(make_sentence(fixtures::sentence_over(rng, vocab, 4, 14)));
        hl += h.back().tokens.size();
        rl += r.back().tokens.size();
        for (std::size_t n = 1; n <= 4; ++n) {
            const auto [mm, tt] = oracle::clipped_matches(h.back().tokens, r.back().tokens, n);
            m[n - 1] += mm;
            t[n - 1] += tt;
        }
    }
    double logp = 0;
    for (std::size_t n = 0; n < 4; ++n) logp += std::log(static_cast<double>(m[n]) / static_cast<double>(t[n]));
    const double bp = hl < rl ? std::exp(1.0 - static_cast<double>(rl) / static_cast<double>(hl)) : 1.0;
    const auto rep = corpus_bleu(h, r);
    EXPECT_EQ(rep.matches, m);
    EXPECT_EQ(rep.totals, t);
    EXPECT_NEAR(rep.bleu, 100.0 * bp * std::exp(logp / 4), 0.01);
}

TEST(CorpusBleu, Errors) {
    EXPECT_THROW(bleu({}, {}), Error);
    EXPECT_THROW(bleu({"a"}, {"a", "b"}), Error);
}

TEST(CurveLog, AppendReopenAndRegression) {
    fixtures::TempDir dir;
    const auto t0 = std::chrono::system_clock::time_point{};
    {
        CurveLog log(dir.path(), "baseline");
        log.append(0, "bleu", 1.5, t0);
        log.append(100, "bleu", 7.25, t0);
        log.append(100, "loss", 3.0, t0);
    }
    CurveLog reopened(dir.path(), "baseline");
    const auto records = reopened.read();
    ASSERT_EQ(records.size(), 3u);
    EXPECT_EQ(records[1], (CurveRecord{100, "bleu", 7.25, "1970-01-01T00:00:00Z"}));
    EXPECT_THROW(reopened.append(50, "bleu", 1.0), Error);
    EXPECT_EQ(reopened.read().size(), 3u);
    EXPECT_EQ(read_file(reopened.path()), read_file(dir / "baseline.curve.tsv"));
    EXPECT_TRUE(CurveLog(dir.path(), "other").read().empty());
    EXPECT_THROW(CurveLog(dir.path(), "a/b"), Error);
}
