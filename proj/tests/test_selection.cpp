#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "domadapt/selection.hpp"
#include "fixtures.hpp"

using namespace domadapt;

namespace {

Corpus lines(std::vector<std::string> text) { return corpus_from_lines(text, Language::L1, Domain::OutOfDomain); }

LmOptions unigram(double alpha) {
    LmOptions o;
    o.order = 1;
    o.alpha = alpha;
    return o;
}

std::vector<ScoredSentence> scores(const std::vector<double>& ced) {
    std::vector<ScoredSentence> out;
    for (std::size_t i = 0; i < ced.size(); ++i) {
        ScoredSentence s;
        s.index = i;
        s.ced = ced[i];
        s.ce_in = ced[i];
        out.push_back(s);
    }
    return out;
}

std::vector<std::size_t> indices(const std::vector<ScoredSentence>& v) {
    std::vector<std::size_t> out;
    for (const auto& s : v) out.push_back(s.index);
    return out;
}

std::vector<ScoredSentence> sort_oracle(std::vector<ScoredSentence> v, std::size_t k) {
    std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.ced < b.ced; });
    v.resize(std::min(k, v.size()));
    return v;
}

}  // namespace

// in: {"a a a"} -> events a,a,a,</s> (N=4), V'={a,</s>,<unk>}, alpha=1:
//   p(a)=4/7, p(</s>)=2/7, p(b)=p(<unk>)=1/7
// out: symmetric with b. For "a a": CE_in = -(2 ln 4/7 + ln 2/7)/3,
// CE_out = -(2 ln 1/7 + ln 2/7)/3, so ced = (2/3) ln(1/4) < 0.
TEST(CedScore, SignsFromOneSymbolCorpora) {
    const Corpus in = lines({"a a a"});
    const Corpus out = lines({"b b b"});
    const auto in_lm = NGramLM::train({&in}, unigram(1.0));
    const auto out_lm = NGramLM::train({&out}, unigram(1.0));
    const auto scored = ced_score(in_lm, out_lm, lines({"a a", "b b"}));
    ASSERT_EQ(scored.size(), 2u);
    EXPECT_NEAR(scored[0].ced, (2.0 / 3.0) * std::log(0.25), 1e-12);
    EXPECT_LT(scored[0].ced, 0.0);
    EXPECT_GT(scored[1].ced, 0.0);
    EXPECT_EQ(scored[0].ced, scored[0].ce_in - scored[0].ce_out);
}

TEST(CedScore, IdenticalModelsScoreZero) {
    const Corpus train = lines({"a b c", "c b a d"});
    LmOptions o;
    const auto lm1 = NGramLM::train({&train}, o);
    const auto lm2 = NGramLM::train({&train}, o);
    for (const auto& s : ced_score(lm1, lm2, lines({"a b", "d d d", "q"}))) EXPECT_NEAR(s.ced, 0.0, 1e-12);
}

TEST(CedScore, SingletonAndEmpty) {
    const Corpus train = lines({"a"});
    const auto lm = NGramLM::train({&train}, unigram(0.1));
    const auto one = ced_score(lm, lm, lines({"a"}));
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].index, 0u);
    EXPECT_THROW(ced_score(lm, lm, lines({})), Error);
}

TEST(SelectLowestK, TieBreakByIndex) {
    EXPECT_EQ(indices(select_lowest_k(scores({0.5, -0.2, -0.2}), 2)), (std::vector<std::size_t>{1, 2}));
}

TEST(SelectLowestK, ZeroAndSaturation) {
    EXPECT_TRUE(select_lowest_k(scores({1, 2, 3}), 0).empty());
    Warnings w;
    EXPECT_EQ(select_lowest_k(scores({3, 1, 2}), 10, &w).size(), 3u);
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NE(w[0].find("k=10"), std::string::npos);
}

TEST(SelectLowestK, MatchesSortOracle) {
    Rng rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> ced;
        const std::size_t n = 1 + rng.below(trial < 10 ? 1000 : 10000);
        for (std::size_t i = 0; i < n; ++i) ced.push_back(static_cast<double>(rng.below(50)) / 7.0 - 3.0);
        const auto s = scores(ced);
        for (std::size_t k : {std::size_t{0}, std::size_t{1}, n / 3, n, n + 5})
            EXPECT_EQ(indices(select_lowest_k(s, k)), indices(sort_oracle(s, k)));
    }
}

TEST(SelectLowestK, InvariantUnderShiftOfCeIn) {
    Rng rng(4);
    std::vector<ScoredSentence> s;
    for (std::size_t i = 0; i < 500; ++i) {
        ScoredSentence x;
        x.index = i;
        x.ce_in = rng.uniform() * 5;
        x.ce_out = rng.uniform() * 5;
        x.ced = x.ce_in - x.ce_out;
        s.push_back(x);
    }
    auto shifted = s;
    for (auto& x : shifted) {
        x.ce_in += 2.5;
        x.ced = x.ce_in - x.ce_out;
    }
    auto a = indices(select_lowest_k(s, 100));
    auto b = indices(select_lowest_k(shifted, 100));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
}

TEST(SizeMatchedSubsample, SaturatesAndIsDeterministic) {
    const Corpus c = lines({"a", "b", "c", "d"});
    const Corpus all = size_matched_subsample(c, 10, 1);
    ASSERT_EQ(all.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(all.sentences[i], c.sentences[i]);
    EXPECT_EQ(subsample_indices(100, 30, 7), subsample_indices(100, 30, 7));
    EXPECT_NE(subsample_indices(100, 30, 7), subsample_indices(100, 30, 8));
    EXPECT_TRUE(size_matched_subsample(c, 0, 1).empty());
}

TEST(SizeMatchedSubsample, SubsetNoDuplicatesOrdered) {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto idx = subsample_indices(200, 37, seed);
        ASSERT_EQ(idx.size(), 37u);
        EXPECT_TRUE(std::is_sorted(idx.begin(), idx.end()));
        EXPECT_EQ(std::set<std::size_t>(idx.begin(), idx.end()).size(), idx.size());
        EXPECT_LT(idx.back(), 200u);
    }
}

// Each of 10 sentences should appear in a size-5 sample with probability 1/2.
TEST(SizeMatchedSubsample, MonteCarloUniformity) {
    std::vector<int> hits(10, 0);
    const int trials = 10000;
    for (int t = 0; t < trials; ++t)
        for (std::size_t i : subsample_indices(10, 5, static_cast<std::uint64_t>(t))) ++hits[i];
    for (int h : hits) EXPECT_NEAR(h / static_cast<double>(trials), 0.5, 0.02);
}

TEST(ScoredFile, RoundTrip) {
    const Corpus in = lines({"a a b"});
    const Corpus out = lines({"b c c"});
    const auto scored = ced_score(NGramLM::train({&in}, unigram(0.5)), NGramLM::train({&out}, unigram(0.5)),
                                  lines({"a b", "c\tc", "a a a a"}));
    const auto parsed = parse_scored(scored_text(scored));
    ASSERT_EQ(parsed.size(), scored.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        EXPECT_EQ(parsed[i].index, scored[i].index);
        EXPECT_EQ(parsed[i].ced, scored[i].ced);
        EXPECT_EQ(parsed[i].ce_in, scored[i].ce_in);
        EXPECT_EQ(parsed[i].sentence.raw, scored[i].sentence.raw);
    }
    EXPECT_THROW(parse_scored("1\t0.5\n"), Error);
}
