#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xling/embeddings.hpp"

namespace xling {

/// Bilingual (source lemma, target lemma) pairs supervising an alignment.
struct SeedLexicon {
    std::string source_language;
    std::string target_language;
    std::vector<std::pair<std::string, std::string>> pairs;

    /// Appends a pair unless the exact pair is already present.
    bool add(std::string source, std::string target);
    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }
};

/// One pair per line, source and target separated by a space or a tab.
/// Blank lines and lines starting with '#' are skipped.
SeedLexicon read_seed_lexicon(std::istream& in, std::string source_language,
                              std::string target_language);
SeedLexicon load_seed_lexicon(const std::filesystem::path& path, std::string source_language,
                              std::string target_language);
void save_seed_lexicon(const SeedLexicon& lexicon, const std::filesystem::path& path);

struct RefinementConfig {
    std::size_t iterations = 20;
    std::size_t csls_k = 10;
    std::size_t induction_vocab_limit = 20000;

    static RefinementConfig resource_rich() { return {}; }
    static RefinementConfig endangered() {
        RefinementConfig c;
        c.iterations = 5;
        return c;
    }
};

/// The mapping acts on row vectors from the right: a source row x lands at
/// x * mapping in target coordinates.
struct AlignmentResult {
    RowMatrix mapping;
    std::size_t iterations_run = 0;
    std::vector<std::size_t> induced_lexicon_size_per_iteration;
    std::size_t seed_pairs_used = 0;
    std::size_t seed_pairs_dropped = 0;
};

/// max |(W^T W - I)_ij|
double orthogonality_error(const RowMatrix& mapping);

/// Orthogonal W minimizing ||source * W - target||_F, where row i of
/// `source` pairs with row i of `target`.
RowMatrix procrustes(const RowMatrix& source, const RowMatrix& target);

/// For each row of `queries`, the mean cosine to its k most similar rows of
/// `space` (k clamped to the row count). Both inputs must have unit rows.
Eigen::VectorXd mean_top_k_similarity(const RowMatrix& unit_queries, const RowMatrix& unit_space,
                                      std::size_t k);

/// CSLS score of `source_vector` against every lemma of `target`, indexed by
/// target rank. `mapped_source` is the source space in target coordinates and
/// provides the target-side hub penalties.
std::vector<double> csls(std::span<const double> source_vector, const WordEmbeddings& target,
                         const WordEmbeddings& mapped_source, std::size_t k);

/// Mutual CSLS nearest neighbors among the most frequent lemmas of each side,
/// in source rank order.
SeedLexicon induce_lexicon(const WordEmbeddings& mapped_source, const WordEmbeddings& target,
                           const RefinementConfig& config);

/// Procrustes on the seed, then `config.iterations` rounds of CSLS lexicon
/// induction and re-solving. Throws AlignmentError when no seed pair resolves.
AlignmentResult align_supervised(const WordEmbeddings& source, const WordEmbeddings& target,
                                 const SeedLexicon& seed, const RefinementConfig& config);

WordEmbeddings apply_mapping(const WordEmbeddings& embeddings, const RowMatrix& mapping);

inline WordEmbeddings apply_alignment(const WordEmbeddings& embeddings,
                                      const AlignmentResult& result) {
    return apply_mapping(embeddings, result.mapping);
}

/// Text matrix format for square matrices: first line the dimension, then
/// one row per line at 17 significant digits.
void write_matrix_text(const RowMatrix& matrix, std::ostream& out);
RowMatrix read_matrix_text(std::istream& in);
void save_matrix_text(const RowMatrix& matrix, const std::filesystem::path& path);
RowMatrix load_matrix_text(const std::filesystem::path& path);

}  // namespace xling
