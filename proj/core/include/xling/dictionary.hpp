#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xling/embeddings.hpp"

namespace xling {

struct Translation {
    std::string language;  ///< ISO 639-3
    std::string lemma;
};

/// Translations that are interchangeable for one sense.
struct MeaningGroup {
    std::vector<Translation> translations;
};

struct Lexeme {
    std::string lemma;
    std::optional<std::string> pos;
    std::vector<MeaningGroup> meaning_groups;
};

struct TranslationDictionary {
    std::string source_language;
    std::vector<Lexeme> lexemes;
};

/// Reads the canonical dictionary schema:
///
///     <dictionary src="myv">
///       <e><l pos="N">lemma</l>
///         <mg><t lang="fin">käännös</t><t lang="rus">перевод</t></mg>
///       </e>
///     </dictionary>
///
/// Throws FormatError (with line) on XML syntax errors and SchemaError when
/// the document does not follow the schema. Meaning groups without
/// translations are dropped; entries without groups are kept.
TranslationDictionary read_dictionary_xml(std::istream& in, const std::string& name = "<stream>");
TranslationDictionary parse_dictionary_xml(const std::filesystem::path& path);

struct TargetStats {
    std::string target_language;
    std::size_t meaning_group_count = 0;  ///< groups with at least one translation into the target
    std::size_t translation_count = 0;
    double translation_share = 0.0;       ///< percent of all translations, 2 decimals
};

struct DictionaryStats {
    std::string source_language;
    std::size_t lexeme_count = 0;
    std::size_t total_translations = 0;
    std::vector<TargetStats> targets;  ///< sorted by target code
};

DictionaryStats dictionary_stats(const TranslationDictionary& dictionary);

/// An aligned resource-rich space plus the policy its vocabulary went through,
/// so citation forms from the dictionary can be matched against it.
struct TargetSpace {
    const WordEmbeddings* embeddings = nullptr;
    NormalizationPolicy policy;
};

using TargetSpaces = std::map<std::string, TargetSpace>;

/// Centroid of every vector of every translation that resolves in its
/// language's space; nullopt when nothing resolves.
std::optional<Eigen::VectorXd> project_lexeme(const Lexeme& lexeme, const TargetSpaces& spaces);

struct CoverageReport {
    std::string language;
    std::size_t lexeme_count = 0;
    std::size_t projected = 0;
    std::size_t skipped = 0;
    std::map<std::string, std::size_t> resolved_translations;  ///< per target language

    /// "key: value" lines.
    std::string to_text() const;
    /// One JSON object, newline-terminated.
    std::string to_json_line() const;
};

struct ProjectionResult {
    WordEmbeddings embeddings;
    CoverageReport coverage;
};

/// One vector per projectable lexeme, ranked in dictionary order. Homonymous
/// lexemes end up as one multi-vector entry. Throws ConstructionError when no
/// lexeme can be projected.
ProjectionResult build_endangered_embeddings(const TranslationDictionary& dictionary,
                                             const TargetSpaces& spaces,
                                             const std::string& language);

}  // namespace xling
