#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "xling/conllu.hpp"
#include "xling/embeddings.hpp"

namespace xling {

struct SkipGramConfig {
    std::size_t window = 5;
    std::size_t negative_samples = 5;
    std::size_t epochs = 5;
    double initial_learning_rate = 0.025;
    /// Linear decay target; capped at the initial rate.
    double final_learning_rate = 1e-4;
    /// Corpus count an out-of-vocabulary lemma needs to be admitted.
    std::size_t min_count = 1;
    double unigram_power = 0.75;
    std::uint64_t rng_seed = 1;
    bool admit_oov = true;
    bool shuffle = true;
};

/// Negative-sampling loss for one (center, context, negatives) tuple:
/// -log s(u.v) - sum_k log s(-u.n_k), with s the logistic function.
double sgns_loss(std::span<const double> center, std::span<const double> context,
                 const std::vector<std::span<const double>>& negatives);

struct SgnsGradient {
    double loss = 0.0;
    std::vector<double> center;
    std::vector<double> context;
    std::vector<std::vector<double>> negatives;  ///< one per negative occurrence
};

SgnsGradient sgns_gradient(std::span<const double> center, std::span<const double> context,
                           const std::vector<std::span<const double>>& negatives);

/// Draws negatives from unigram counts raised to `power` by inverse-CDF
/// lookup of one uniform draw per sample.
class UnigramSampler {
public:
    UnigramSampler(const std::vector<std::size_t>& counts, double power);
    std::size_t sample(double uniform01) const;
    double probability(std::size_t id) const;

private:
    std::vector<double> cumulative_;
};

struct FinetuneResult {
    WordEmbeddings embeddings;
    std::vector<double> epoch_loss;  ///< mean tuple loss per epoch
    std::size_t admitted_oov = 0;
};

/// Skip-gram with negative sampling, starting from `embeddings` (multi-vector
/// entries collapsed to their mean) and a zero context table.
///
/// Training order, for reproducibility: admitted OOV lemmas are initialized
/// in first-appearance order, each component (u - 0.5) / dim; then per epoch
/// the sentences are shuffled and every (center, context) pair within the
/// window draws `negative_samples` negatives (a draw equal to the context is
/// dropped) and takes one gradient step. The rate decays linearly over the
/// centers processed.
FinetuneResult skipgram_finetune(const WordEmbeddings& embeddings,
                                 const std::vector<LemmaSentence>& corpus,
                                 const SkipGramConfig& config);

}  // namespace xling
