#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xling/align.hpp"
#include "xling/embeddings.hpp"
#include "xling/reduce.hpp"
#include "xling/sentiment.hpp"
#include "xling/skipgram.hpp"

namespace xling::cli {

enum class Role { anchor, resource_rich, endangered };

std::string_view to_string(Role role);

struct LanguageConfig {
    std::string code;
    Role role = Role::resource_rich;
    std::optional<std::filesystem::path> embeddings;
    NormalizationPolicy normalization;
    std::optional<std::filesystem::path> seed_lexicon;  ///< resource-rich: pairs into the anchor
    std::optional<std::filesystem::path> dictionary;    ///< endangered
    std::optional<std::filesystem::path> treebank;      ///< endangered: fine-tuning corpus
    std::optional<std::string> realign_to;              ///< endangered
};

struct EvaluationConfig {
    std::string language;
    std::optional<std::filesystem::path> corpus;    ///< "<label>\t<lemmas>" lines
    std::optional<std::filesystem::path> treebank;  ///< CoNLL-U plus a label sidecar
    std::optional<std::filesystem::path> labels;
    TransferMode mode = TransferMode::direct;
};

struct SentimentSection {
    std::optional<std::filesystem::path> train;
    std::size_t epochs = 30;
    double learning_rate = 0.1;
    std::size_t buckets = kDefaultBigramBuckets;
    bool shuffle = true;
    bool bigrams_from_anchor = false;
    std::vector<EvaluationConfig> evaluations;
};

struct PipelineConfig {
    std::uint64_t seed = 1;
    std::filesystem::path output_dir = "out";
    ReductionConfig reduction;
    RefinementConfig alignment = RefinementConfig::resource_rich();
    RefinementConfig realignment = RefinementConfig::endangered();
    bool realign_with_dictionary_seed = true;
    SkipGramConfig finetune;
    std::vector<LanguageConfig> languages;
    SentimentSection sentiment;

    const LanguageConfig& anchor() const;
    const LanguageConfig* find(std::string_view code) const;
    std::vector<const LanguageConfig*> with_role(Role role) const;

    /// Canonical JSON of the effective settings (paths as resolved).
    nlohmann::json to_json() const;
    /// FNV-1a 64 of the canonical JSON without the output directory, as 16 hex digits.
    std::string hash() const;
};

/// Parses and validates a config document. Relative paths resolve against
/// `base_dir`. Throws ConfigError on any schema or consistency problem.
PipelineConfig parse_pipeline_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads a config file. A missing file or invalid JSON is a ConfigError.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

}  // namespace xling::cli
