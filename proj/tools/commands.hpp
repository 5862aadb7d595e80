#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pipeline_config.hpp"
#include "xling/embeddings.hpp"
#include "xling/sentiment.hpp"

namespace xling::cli {

/// Progress messages go here (std::cerr by default); nullptr silences them.
void set_log_stream(std::ostream* stream);

/// Loads a config file and applies the command-line overrides.
PipelineConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed = std::nullopt,
                           std::optional<std::filesystem::path> out = std::nullopt);

// Each stage reads its inputs and the previous stage's artifacts, computes
// everything in memory, and only then replaces <out>/<stage>/, updates
// manifest.json and metrics.jsonl. Missing inputs are config errors.

/// <out>/reduced/<code>.vec for the anchor and every resource-rich language.
void cmd_reduce(const PipelineConfig& config);

/// <out>/aligned/<code>.vec plus <code>-<anchor>.matrix per resource-rich language.
void cmd_align(const PipelineConfig& config);

/// <out>/projected/<code>.vec, <code>.coverage.txt, <code>.coverage.jsonl and
/// <code>.stats.json per endangered language.
void cmd_project(const PipelineConfig& config);

/// Fine-tunes each projected space on its treebank, then re-aligns it to its
/// realign_to space with dictionary pairs as seed. A stage configured with
/// zero epochs or zero iterations is skipped. Writes <out>/final/.
void cmd_finetune(const PipelineConfig& config);

/// Every stage in order; the sentiment stages only when configured.
void cmd_run(const PipelineConfig& config);

struct NnQuery {
    std::string query;
    std::string from;
    std::string to;
    std::size_t k = 10;
    Metric metric = Metric::cosine;
    std::size_t csls_k = 10;
    /// Override the run directory's spaces for either side.
    std::optional<std::filesystem::path> from_vectors;
    std::optional<std::filesystem::path> to_vectors;
};

/// Top-k neighbors of `query` as a tab-separated table. With a config the
/// spaces default to the run directory (final/ for endangered languages,
/// aligned/ otherwise). Throws InputError for an out-of-vocabulary query.
std::string cmd_nn(const PipelineConfig* config, const NnQuery& query);

/// Neighbors of every vector of `lemma`, merged by best score per lemma.
std::vector<Neighbor> lemma_neighbors(const WordEmbeddings& from, const WordEmbeddings& to,
                                      std::string_view lemma, std::size_t k, Metric metric,
                                      std::size_t csls_k);

/// <out>/sentiment/model.xlsm trained on the anchor-language corpus.
void cmd_sentiment_train(const PipelineConfig& config);

struct EvaluationReport {
    std::string language;
    TransferMode mode = TransferMode::direct;
    Evaluation evaluation;
};

/// Evaluates the trained model on every configured test set and writes
/// <out>/evaluation/report.txt. Returns the reports in config order.
std::vector<EvaluationReport> cmd_sentiment_eval(const PipelineConfig& config);

/// Share of source lemmas with at least one (source, target) pair in both
/// spaces whose cosine top-1 neighbor in `target` is one of their pairs.
double top1_retrieval(const WordEmbeddings& source, const WordEmbeddings& target,
                      const std::vector<std::pair<std::string, std::string>>& pairs);

/// (lemma, normalized translation) pairs of a dictionary into one language.
std::vector<std::pair<std::string, std::string>> dictionary_pairs(const TranslationDictionary& dictionary,
                                                                  const std::string& language,
                                                                  const NormalizationPolicy& policy);

}  // namespace xling::cli
