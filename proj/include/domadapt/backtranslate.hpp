#pragma once

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>

#include <unistd.h>

#include "domadapt/corpus.hpp"
#include "domadapt/error.hpp"
#include "domadapt/parallel.hpp"

namespace domadapt {

enum class TranslatorKind { Dictionary, External };

/// How to produce the pseudo in-domain L1 corpus. External commands get
/// "{input}" and "{output}" replaced by file paths and must write exactly
/// one output line per input line.
struct TranslatorSpec {
    TranslatorKind kind = TranslatorKind::Dictionary;
    std::optional<std::filesystem::path> lexicon_path;
    std::optional<std::string> command_template;

    void validate() const {
        if (kind == TranslatorKind::Dictionary && !lexicon_path)
            throw Error("translator: dictionary mode requires a lexicon path");
        if (kind == TranslatorKind::External && !command_template)
            throw Error("translator: external mode requires a command template");
    }
};

/// Word-for-word lexicon; tokens without an entry translate to themselves.
class BilingualLexicon {
public:
    BilingualLexicon() = default;
    explicit BilingualLexicon(std::unordered_map<std::string, std::string> entries) : entries_(std::move(entries)) {}

    /// "source<TAB>target" per line; blank lines ignored, later entries win.
    static BilingualLexicon parse(std::string_view text, const std::string& origin = "<lexicon>") {
        std::unordered_map<std::string, std::string> entries;
        std::size_t line_no = 0;
        for (auto line : split_lines(text)) {
            ++line_no;
            if (!valid_utf8(line)) throw Error(origin + ": invalid UTF-8 at line " + std::to_string(line_no));
            if (split_whitespace(line).empty()) continue;
            const auto tab = line.find('\t');
            if (tab == std::string_view::npos)
                throw Error(origin + ": expected source<TAB>target at line " + std::to_string(line_no));
            const auto src = split_whitespace(line.substr(0, tab));
            const auto tgt = split_whitespace(line.substr(tab + 1));
            if (src.size() != 1 || tgt.size() != 1)
                throw Error(origin + ": entries must be single tokens at line " + std::to_string(line_no));
            entries[src[0]] = tgt[0];
        }
        return BilingualLexicon(std::move(entries));
    }

    static BilingualLexicon load(const std::filesystem::path& path) {
        if (!std::filesystem::exists(path)) throw Error("lexicon not found: '" + path.string() + "'");
        return parse(read_file(path), path.string());
    }

    const std::string& translate(const std::string& token) const {
        auto it = entries_.find(token);
        return it == entries_.end() ? token : it->second;
    }

    std::size_t size() const { return entries_.size(); }

private:
    std::unordered_map<std::string, std::string> entries_;
};

inline Corpus translate_with_lexicon(const Corpus& corpus, const BilingualLexicon& lexicon) {
    Corpus out;
    out.language = Language::L1;
    out.domain = Domain::InDomain;
    out.sentences.resize(corpus.size());
    parallel_for(corpus.size(), [&](std::size_t i) {
        std::vector<std::string> tokens;
        tokens.reserve(corpus.sentences[i].tokens.size());
        for (const auto& t : corpus.sentences[i].tokens) tokens.push_back(lexicon.translate(t));
        out.sentences[i] = sentence_from_tokens(std::move(tokens));
    });
    return out;
}

inline std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size()))
        s.replace(pos, from.size(), to);
    return s;
}

inline std::string shell_quote(const std::string& s) { return "'" + replace_all(s, "'", "'\\''") + "'"; }

inline Corpus translate_with_command(const Corpus& corpus, const std::string& command_template) {
    namespace fs = std::filesystem;
    static std::atomic<unsigned> counter{0};
    const fs::path dir = fs::temp_directory_path() /
                         ("domadapt-bt-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    struct Cleanup {
        fs::path p;
        ~Cleanup() {
            std::error_code ec;
            fs::remove_all(p, ec);
        }
    } cleanup{dir};

    const fs::path input = dir / "input.txt";
    const fs::path output = dir / "output.txt";
    write_corpus(corpus, input);
    std::string cmd = replace_all(command_template, "{input}", shell_quote(input.string()));
    cmd = replace_all(cmd, "{output}", shell_quote(output.string()));
    const int rc = std::system(cmd.c_str());
    if (rc != 0) throw Error("back_translate: external command failed with status " + std::to_string(rc));
    if (!fs::exists(output)) throw Error("back_translate: external command produced no output file");

    const std::string text = read_file(output);
    const auto lines = split_lines(text);
    if (lines.size() != corpus.size())
        throw Error("back_translate: line-count mismatch: " + std::to_string(corpus.size()) + " input lines, " +
                    std::to_string(lines.size()) + " output lines");
    Corpus out;
    out.language = Language::L1;
    out.domain = Domain::InDomain;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (!valid_utf8(lines[i]))
            throw Error("back_translate: invalid UTF-8 in output at line " + std::to_string(i + 1));
        // Blank translations are kept so the output stays line-aligned.
        out.sentences.push_back(make_sentence(std::string(lines[i])));
    }
    return out;
}

/// Translates the L2 in-domain corpus into a pseudo in-domain L1 corpus,
/// one output sentence per input sentence, order preserved.
inline Corpus back_translate(const Corpus& corpus, const TranslatorSpec& translator) {
    if (corpus.language != Language::L2 || corpus.domain != Domain::InDomain)
        throw Error("back_translate: input must be the L2 in-domain corpus");
    translator.validate();
    Corpus out = translator.kind == TranslatorKind::Dictionary
                     ? translate_with_lexicon(corpus, BilingualLexicon::load(*translator.lexicon_path))
                     : translate_with_command(corpus, *translator.command_template);
    out.source_path = corpus.source_path;
    return out;
}

}  // namespace domadapt
