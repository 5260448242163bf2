#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "domadapt/error.hpp"

namespace domadapt {

enum class Language { L1, L2 };
enum class Domain { InDomain, OutOfDomain };

inline const char* to_string(Language l) { return l == Language::L1 ? "L1" : "L2"; }
inline const char* to_string(Domain d) { return d == Domain::InDomain ? "in" : "out"; }

inline Language other(Language l) { return l == Language::L1 ? Language::L2 : Language::L1; }

struct Sentence {
    std::string raw;
    std::vector<std::string> tokens;

    bool operator==(const Sentence&) const = default;
};

struct Corpus {
    Language language = Language::L1;
    Domain domain = Domain::InDomain;
    std::vector<Sentence> sentences;
    std::filesystem::path source_path;
    std::size_t blank_lines = 0;

    std::size_t size() const { return sentences.size(); }
    bool empty() const { return sentences.empty(); }
};

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

inline std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        const std::size_t start = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

inline std::string join(std::span<const std::string> tokens, std::string_view sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += sep;
        out += tokens[i];
    }
    return out;
}

inline Sentence make_sentence(std::string raw) {
    Sentence s;
    s.tokens = split_whitespace(raw);
    s.raw = std::move(raw);
    return s;
}

/// Sentence whose raw text is the space-joined token list.
inline Sentence sentence_from_tokens(std::vector<std::string> tokens) {
    Sentence s;
    s.raw = join(tokens);
    s.tokens = std::move(tokens);
    return s;
}

/// Strict UTF-8 check (no overlongs, no surrogates, max U+10FFFF).
inline bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    const auto byte = [&](std::size_t k) { return static_cast<unsigned char>(s[k]); };
    while (i < s.size()) {
        const unsigned char c = byte(i);
        std::size_t len;
        unsigned char lo = 0x80, hi = 0xBF;
        if (c < 0x80) {
            ++i;
            continue;
        } else if (c >= 0xC2 && c <= 0xDF) {
            len = 2;
        } else if (c >= 0xE0 && c <= 0xEF) {
            len = 3;
            if (c == 0xE0) lo = 0xA0;
            if (c == 0xED) hi = 0x9F;
        } else if (c >= 0xF0 && c <= 0xF4) {
            len = 4;
            if (c == 0xF0) lo = 0x90;
            if (c == 0xF4) hi = 0x8F;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        if (byte(i + 1) < lo || byte(i + 1) > hi) return false;
        for (std::size_t k = 2; k < len; ++k)
            if ((byte(i + k) & 0xC0) != 0x80) return false;
        i += len;
    }
    return true;
}

/// Length in bytes of the UTF-8 sequence starting with lead byte c.
/// Assumes valid input; stray continuation bytes count as one.
inline std::size_t utf8_char_len(unsigned char c) {
    if (c >= 0xF0) return 4;
    if (c >= 0xE0) return 3;
    if (c >= 0xC0) return 2;
    return 1;
}

inline std::vector<std::string> utf8_chars(std::string_view word) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < word.size();) {
        const std::size_t len = std::min(utf8_char_len(static_cast<unsigned char>(word[i])), word.size() - i);
        out.emplace_back(word.substr(i, len));
        i += len;
    }
    return out;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

/// Splits on LF. A trailing LF does not start an extra line.
inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    return lines;
}

/// Builds a corpus from in-memory lines; whitespace-only lines are dropped
/// and counted. `origin` names the source in error messages.
inline Corpus corpus_from_lines(std::span<const std::string_view> lines, Language language, Domain domain,
                                const std::string& origin = "<memory>") {
    Corpus corpus;
    corpus.language = language;
    corpus.domain = domain;
    corpus.source_path = origin;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!valid_utf8(lines[i]))
            throw Error(origin + ": invalid UTF-8 at line " + std::to_string(i + 1));
        Sentence s = make_sentence(std::string(lines[i]));
        if (s.tokens.empty()) {
            ++corpus.blank_lines;
            continue;
        }
        corpus.sentences.push_back(std::move(s));
    }
    return corpus;
}

inline Corpus corpus_from_lines(const std::vector<std::string>& lines, Language language, Domain domain,
                                const std::string& origin = "<memory>") {
    std::vector<std::string_view> views(lines.begin(), lines.end());
    return corpus_from_lines(std::span<const std::string_view>(views), language, domain, origin);
}

inline Corpus load_corpus(const std::filesystem::path& path, Language language, Domain domain) {
    const std::string text = read_file(path);
    const auto lines = split_lines(text);
    Corpus c = corpus_from_lines(std::span<const std::string_view>(lines), language, domain, path.string());
    c.source_path = path;
    return c;
}

/// One raw line per sentence, LF-terminated.
inline std::string corpus_text(const Corpus& corpus) {
    std::string out;
    for (const auto& s : corpus.sentences) {
        out += s.raw;
        out += '\n';
    }
    return out;
}

inline void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    write_file(path, corpus_text(corpus));
}

/// Concatenates corpora in order; tags are taken from the arguments.
inline Corpus concat(std::span<const Corpus* const> parts, Language language, Domain domain) {
    Corpus out;
    out.language = language;
    out.domain = domain;
    for (const Corpus* c : parts) {
        out.sentences.insert(out.sentences.end(), c->sentences.begin(), c->sentences.end());
        out.blank_lines += c->blank_lines;
    }
    return out;
}

}  // namespace domadapt
