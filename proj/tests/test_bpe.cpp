#include <gtest/gtest.h>

#include <map>

#include "domadapt/bpe.hpp"
#include "domadapt/rng.hpp"

using namespace domadapt;

namespace {

Corpus lines(std::vector<std::string> text, Language lang = Language::L1) {
    return corpus_from_lines(text, lang, Domain::InDomain);
}

// Hand-style pair count over "chars + </w>" symbol sequences.
std::map<BpeModel::Pair, int> count_pairs(const std::vector<std::string>& words) {
    std::map<BpeModel::Pair, int> counts;
    for (const auto& w : words) {
        auto sym = utf8_chars(w);
        sym.emplace_back("</w>");
        for (std::size_t i = 0; i + 1 < sym.size(); ++i) ++counts[{sym[i], sym[i + 1]}];
    }
    return counts;
}

}  // namespace

TEST(BpeTrain, FirstMergeIsMostFrequentPair) {
    const auto pairs = count_pairs({"abab"});
    EXPECT_EQ((pairs.at({"a", "b"})), 2);
    EXPECT_EQ((pairs.at({"b", "a"})), 1);

    const Corpus c = lines({"abab"});
    const auto model = bpe_train({&c}, 1);
    ASSERT_EQ(model.merges().size(), 1u);
    EXPECT_EQ(model.merges()[0], (BpeModel::Pair{"a", "b"}));
}

TEST(BpeTrain, TieBreaksLexicographically) {
    // (a,</w>) (b,a) (c,</w>) (d,c) all occur once.
    const Corpus c = lines({"dc ba"});
    const auto model = bpe_train({&c}, 2);
    EXPECT_EQ(model.merges()[0], (BpeModel::Pair{"a", "</w>"}));
    EXPECT_EQ(model.merges()[1], (BpeModel::Pair{"b", "a</w>"}));
}

TEST(BpeTrain, ZeroMergesGivesCharacterInventory) {
    const Corpus c = lines({"abc cab"});
    const auto model = bpe_train({&c}, 0);
    EXPECT_TRUE(model.merges().empty());
    EXPECT_EQ(model.vocab(), (std::set<std::string>{"a", "b", "c", "</w>"}));
}

TEST(BpeTrain, SharedVocabAcrossScripts) {
    const Corpus l1 = lines({"abc"}, Language::L1);
    const Corpus l2 = lines({"\xD0\xB4\xD0\xB0"}, Language::L2);  // Cyrillic "да"
    const auto model = bpe_train({&l1, &l2}, 0);
    for (const char* ch : {"a", "b", "c", "\xD0\xB4", "\xD0\xB0"}) EXPECT_TRUE(model.vocab().count(ch)) << ch;
}

TEST(BpeTrain, NoTextIsAnError) {
    const Corpus empty = lines({});
    EXPECT_THROW(bpe_train({&empty}, 10), Error);
}

TEST(BpeTrain, StopsWhenPairsRunOut) {
    const Corpus c = lines({"ab"});
    const auto model = bpe_train({&c}, 100);
    EXPECT_EQ(model.merges().size(), 2u);  // a+b, ab+</w>
    EXPECT_EQ(model.merge_count(), 100u);
    EXPECT_LE(model.vocab().size(), model.merges().size() + 3);
}

TEST(BpeApply, SingleMergeSegmentation) {
    const BpeModel model({{"a", "b"}}, {"a", "b"}, 1);
    EXPECT_EQ(model.segment("abab"), (std::vector<std::string>{"ab", "ab</w>"}));
}

TEST(BpeApply, FullyMergeableWordIsOneToken) {
    const Corpus c = lines({"hello hello hello"});
    const auto model = bpe_train({&c}, 50);
    EXPECT_EQ(model.segment("hello"), (std::vector<std::string>{"hello</w>"}));
}

TEST(BpeApply, UnseenCharactersFallBackToSingleChars) {
    const Corpus c = lines({"aaa"});
    const auto model = bpe_train({&c}, 10);
    EXPECT_EQ(model.segment("xyz"), (std::vector<std::string>{"x", "y", "z</w>"}));
}

TEST(BpeApply, SentenceLevel) {
    const BpeModel model({{"a", "b"}}, {"a", "b"}, 1);
    const Sentence out = bpe_apply(model, make_sentence("abab b"));
    EXPECT_EQ(out.tokens, (std::vector<std::string>{"ab", "ab</w>", "b</w>"}));
    EXPECT_EQ(out.raw, "ab ab</w> b</w>");
    EXPECT_EQ(desegment(out).tokens, (std::vector<std::string>{"abab", "b"}));
}

TEST(BpeModel, SerializeRoundTrip) {
    const Corpus c = lines({"the cat sat on the mat", "the hat"});
    const auto model = bpe_train({&c}, 20);
    const auto loaded = BpeModel::parse(model.serialize());
    EXPECT_EQ(loaded.merges(), model.merges());
    for (const char* w : {"the", "cat", "mat", "zebra"}) EXPECT_EQ(loaded.segment(w), model.segment(w));
    EXPECT_TRUE(model.serialize().starts_with("#domadapt-bpe v1 merges=" + std::to_string(model.merges().size()) + "\n"));
}

TEST(BpeModel, ParseRejectsBadFiles) {
    EXPECT_THROW(BpeModel::parse("nonsense\n"), Error);
    EXPECT_THROW(BpeModel::parse("#domadapt-bpe v1 merges=2\na b\n"), Error);
    EXPECT_THROW(BpeModel::parse("#domadapt-bpe v1 merges=1\na b c\n"), Error);
}

TEST(BpeTrain, Deterministic) {
    Rng rng(3);
    std::vector<std::string> text;
    for (int i = 0; i < 200; ++i) {
        std::string s;
        for (int w = 0; w < 6; ++w) {
            if (w) s += ' ';
            for (std::uint64_t k = 0, n = 1 + rng.below(7); k < n; ++k) s += static_cast<char>('a' + rng.below(5));
        }
        text.push_back(s);
    }
    const Corpus c = lines(text);
    EXPECT_EQ(bpe_train({&c}, 80).merges(), bpe_train({&c}, 80).merges());
}

// Round-trip property over generated words, including multibyte text and
// characters the model never saw.
TEST(BpeApply, PropertyRoundTrip) {
    Rng rng(11);
    const std::vector<std::string> chars{"a", "b", "c", "d", "\xC3\xA9", "\xE4\xB8\xAD", "1", "-", "'", "w", "/"};
    const auto gen = [&] {
        std::string s;
        for (std::uint64_t w = 0, n = 1 + rng.below(8); w < n; ++w) {
            if (w) s += ' ';
            for (std::uint64_t k = 0, m = 1 + rng.below(9); k < m; ++k) s += chars[rng.below(chars.size())];
        }
        return s;
    };
    std::vector<std::string> train;
    for (int i = 0; i < 300; ++i) train.push_back(gen());
    const Corpus c = lines(train);
    const auto model = bpe_train({&c}, 200);
    for (int i = 0; i < 500; ++i) {
        const Sentence s = make_sentence(gen() + " \xF0\x9F\x98\x80x");
        EXPECT_EQ(desegment(bpe_apply(model, s).tokens), s.tokens);
    }
}
