#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xling/conllu.hpp"
#include "xling/dictionary.hpp"
#include "xling/embeddings.hpp"

namespace xling {

inline constexpr std::size_t kDefaultBigramBuckets = std::size_t{1} << 20;

/// Linear softmax classifier over the mean of frozen word vectors and
/// learnable hashed-bigram vectors. Bigram rows start at zero and are stored
/// sparsely; an absent row reads as zero.
class SentimentModel {
public:
    SentimentModel() = default;
    SentimentModel(std::size_t dim, std::size_t buckets);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t buckets() const noexcept { return buckets_; }
    std::size_t trained_epochs() const noexcept { return trained_epochs_; }
    void set_trained_epochs(std::size_t e) noexcept { trained_epochs_ = e; }

    RowMatrix& weights() noexcept { return weights_; }  ///< 2 x dim, row 0 = negative
    const RowMatrix& weights() const noexcept { return weights_; }
    Eigen::Vector2d& bias() noexcept { return bias_; }
    const Eigen::Vector2d& bias() const noexcept { return bias_; }

    /// Bigram row for a bucket (zero if never touched).
    Eigen::VectorXd bigram_row(std::uint64_t bucket) const;
    /// Mutable row, created on demand.
    Eigen::VectorXd& bigram_row_mut(std::uint64_t bucket);
    const std::unordered_map<std::uint64_t, Eigen::VectorXd>& bigram_rows() const noexcept {
        return bigrams_;
    }

private:
    std::size_t dim_ = 0;
    std::size_t buckets_ = 0;
    std::size_t trained_epochs_ = 0;
    RowMatrix weights_;
    Eigen::Vector2d bias_ = Eigen::Vector2d::Zero();
    std::unordered_map<std::uint64_t, Eigen::VectorXd> bigrams_;
};

/// FNV-1a 64 of "first\x01second", masked to the bucket count.
std::uint64_t bigram_bucket(std::string_view first, std::string_view second, std::size_t buckets);

enum class TransferMode { direct, substitute, boost };

std::optional<TransferMode> parse_transfer_mode(std::string_view name);
std::string_view to_string(TransferMode mode);

struct TransferOptions {
    TransferMode mode = TransferMode::direct;
    /// Space the model was trained in, aligned with the source space.
    const WordEmbeddings* anchor = nullptr;
    /// Dictionary of the source language and the spaces its translations
    /// resolve in (boost mode).
    const TranslationDictionary* dictionary = nullptr;
    TargetSpaces resource_spaces;
    /// Key bigrams on the substituted anchor lemmas instead of the source lemmas.
    bool bigrams_from_anchor = false;
};

/// Maps source lemmas to the word vectors (and bigram keys) a mode feeds the model.
class VectorResolver {
public:
    /// Throws ConfigError when the mode lacks its anchor space or dictionary.
    VectorResolver(const WordEmbeddings& source, TransferOptions options);

    std::optional<Eigen::VectorXd> vector(const std::string& lemma) const;
    std::string bigram_key(const std::string& lemma) const;

    /// Anchor row index closest by cosine, if the lemma has a usable vector.
    std::optional<std::size_t> substitute_row(const std::string& lemma) const;

private:
    std::optional<Eigen::VectorXd> dictionary_centroid(const std::string& lemma) const;

    const WordEmbeddings* source_;
    TransferOptions options_;
    RowMatrix unit_anchor_;
    std::map<std::string, std::vector<std::size_t>, std::less<>> lexemes_by_lemma_;
};

/// Word vectors and bigram buckets contributing to one sentence.
struct SentenceUnits {
    std::vector<Eigen::VectorXd> words;
    std::vector<std::uint64_t> buckets;
    std::size_t count() const noexcept { return words.size() + buckets.size(); }
};

SentenceUnits sentence_units(const std::vector<std::string>& lemmas, const VectorResolver& resolver,
                             std::size_t buckets);

/// Mean over word units and bigram units; zero when there are none.
Eigen::VectorXd features(const SentenceUnits& units, const SentimentModel& model);

/// featurize with source vectors used directly. Throws InputError on an empty sentence.
Eigen::VectorXd featurize(const std::vector<std::string>& lemmas, const WordEmbeddings& embeddings,
                          const SentimentModel& model);

/// Softmax over the two logits, index 0 = negative.
std::array<double, 2> class_probabilities(const SentimentModel& model, const Eigen::VectorXd& feature);

/// Cross-entropy loss of one example and its gradient in every trainable parameter.
struct ExampleGradient {
    double loss = 0.0;
    RowMatrix weights;
    Eigen::Vector2d bias;
    std::map<std::uint64_t, Eigen::VectorXd> bigrams;
};

double example_loss(const SentimentModel& model, const SentenceUnits& units, Sentiment label);
ExampleGradient example_gradient(const SentimentModel& model, const SentenceUnits& units,
                                 Sentiment label);

struct LabeledSentence {
    std::vector<std::string> lemmas;
    Sentiment label = Sentiment::negative;
};

/// "<label>\t<lemma lemma ...>" per line. Lines with labels other than
/// positive/negative are dropped.
std::vector<LabeledSentence> read_labeled_corpus(std::istream& in);
std::vector<LabeledSentence> load_labeled_corpus(const std::filesystem::path& path);

struct SentimentTrainConfig {
    std::size_t epochs = 30;
    double learning_rate = 0.1;  ///< decays linearly to zero over all updates
    std::size_t buckets = kDefaultBigramBuckets;
    std::uint64_t rng_seed = 1;
    bool shuffle = true;
};

struct TrainResult {
    SentimentModel model;
    std::vector<double> accuracy_trace;  ///< training accuracy after each epoch
};

/// SGD on softmax cross-entropy; the word vectors are read from `embeddings`
/// and never modified. Throws TrainingError unless both labels occur.
TrainResult train(const std::vector<LabeledSentence>& corpus, const WordEmbeddings& embeddings,
                  const SentimentTrainConfig& config);

struct Prediction {
    Sentiment label = Sentiment::negative;
    double positive_probability = 0.5;
    std::array<double, 2> probabilities{0.5, 0.5};
};

Prediction predict(const std::vector<std::string>& lemmas, const SentimentModel& model,
                   const VectorResolver& resolver);
Prediction predict(const std::vector<std::string>& lemmas, const SentimentModel& model,
                   const WordEmbeddings& source, const TransferOptions& options);

struct Evaluation {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    /// confusion[gold][predicted], index 0 = negative.
    std::array<std::array<std::size_t, 2>, 2> confusion{};

    std::string to_text() const;
};

Evaluation evaluate(const std::vector<LabeledSentence>& test, const SentimentModel& model,
                    const VectorResolver& resolver);

// Binary container: "XLSM", u32 version, u32 dim, u32 bucket count, then
// little-endian f32 weights (2 x dim), bias (2) and bigram table (buckets x dim).
inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_model(const SentimentModel& model, std::ostream& out);
SentimentModel read_model(std::istream& in);
void save_model(const SentimentModel& model, const std::filesystem::path& path);
SentimentModel load_model(const std::filesystem::path& path);

}  // namespace xling
