#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace xling {

enum class Sentiment { negative = 0, positive = 1 };

/// "positive" / "negative"; anything else (e.g. "neutral") yields nullopt.
std::optional<Sentiment> parse_sentiment(std::string_view label);
std::string_view to_string(Sentiment s);

struct LemmaSentence {
    std::vector<std::string> lemmas;
    std::string sentence_id;
    /// Translations found in "# text_xx = ..." or "# text[xx] = ..." comments, keyed by xx.
    std::map<std::string, std::string> translation_comments;
    std::optional<Sentiment> sentiment_label;
};

/// Lemma sequences of a CoNLL-U file. Multiword-token ranges and empty nodes
/// are skipped; a "_" lemma falls back to the lowercased form. Sentences
/// without a sent_id are numbered from 1. Throws FormatError with the line
/// number when a token line does not have 10 fields.
std::vector<LemmaSentence> read_conllu(std::istream& in);
std::vector<LemmaSentence> parse_conllu(const std::filesystem::path& path);

/// Sidecar annotations, one "<sentence_id>\t<label>" per line. Labels other
/// than positive/negative are dropped.
std::map<std::string, Sentiment> read_sentiment_labels(std::istream& in);
std::map<std::string, Sentiment> load_sentiment_labels(const std::filesystem::path& path);

/// Sets sentiment_label on sentences whose id is annotated; returns how many were labeled.
std::size_t attach_sentiment_labels(std::vector<LemmaSentence>& sentences,
                                    const std::map<std::string, Sentiment>& labels);

}  // namespace xling
