#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace xling {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Vocabulary plus dense vectors for one language.
///
/// Lemmas are identified by their frequency rank (0 = most frequent), which
/// is their position in the original file order. A lemma may own several
/// matrix rows (for instance one per part-of-speech variant); all of them are
/// kept. Instances are immutable once built.
class WordEmbeddings {
public:
    WordEmbeddings() = default;

    /// `lemmas[r]` is the lemma of rank r and `rows[r]` the matrix rows it owns.
    /// Throws FormatError when the invariants do not hold.
    WordEmbeddings(std::string language, RowMatrix matrix, std::vector<std::string> lemmas,
                   std::vector<std::vector<std::size_t>> rows);

    const std::string& language() const noexcept { return language_; }
    std::size_t dim() const noexcept { return static_cast<std::size_t>(matrix_.cols()); }
    std::size_t lemma_count() const noexcept { return lemmas_.size(); }
    std::size_t vector_count() const noexcept { return static_cast<std::size_t>(matrix_.rows()); }
    bool empty() const noexcept { return lemmas_.empty(); }

    const RowMatrix& matrix() const noexcept { return matrix_; }
    const std::vector<std::string>& lemmas() const noexcept { return lemmas_; }
    const std::string& lemma(std::size_t rank) const { return lemmas_.at(rank); }
    const std::vector<std::size_t>& rows_of(std::size_t rank) const { return rows_.at(rank); }
    std::size_t owner_of_row(std::size_t row) const { return row_owner_.at(row); }
    std::optional<std::size_t> rank_of(std::string_view lemma) const;
    bool contains(std::string_view lemma) const { return rank_of(lemma).has_value(); }

    std::span<const double> row(std::size_t r) const {
        return {matrix_.data() + r * dim(), dim()};
    }

    /// All vectors registered for `lemma` in registration order; empty when unknown.
    std::vector<std::span<const double>> lookup(std::string_view lemma) const;

    /// Mean of the lemma's vectors.
    Eigen::VectorXd mean_vector(std::size_t rank) const;

    /// Same vocabulary and row structure over a replacement matrix with the
    /// same row count (dimension may differ).
    WordEmbeddings with_matrix(RowMatrix matrix) const;

private:
    std::string language_;
    RowMatrix matrix_;
    std::vector<std::string> lemmas_;
    std::vector<std::vector<std::size_t>> rows_;
    std::vector<std::size_t> row_owner_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Accumulates (lemma, vector) pairs in order. Repeated lemmas gain extra rows.
class EmbeddingsBuilder {
public:
    EmbeddingsBuilder(std::string language, std::size_t dim);

    void add(std::string_view lemma, std::span<const double> vector);
    std::size_t dim() const noexcept { return dim_; }
    std::size_t vector_count() const noexcept { return data_.size() / dim_; }
    WordEmbeddings build() &&;

private:
    std::string language_;
    std::size_t dim_;
    std::vector<double> data_;
    std::vector<std::string> lemmas_;
    std::vector<std::vector<std::size_t>> rows_;
    std::map<std::string, std::size_t, std::less<>> index_;
};

/// Lemma sets, ranks and per-lemma vector lists agree (vectors within `tolerance`).
bool structurally_equal(const WordEmbeddings& a, const WordEmbeddings& b, double tolerance = 0.0);

// word2vec text format: "<count> <dim>" header, then one "<token> <floats...>"
// line per vector. Written with 9 significant digits and LF line endings.
inline constexpr int kTextPrecision = 9;

WordEmbeddings read_word2vec_text(std::istream& in, const std::string& language);
WordEmbeddings load_word2vec_text(const std::filesystem::path& path, const std::string& language);
void write_word2vec_text(const WordEmbeddings& embeddings, std::ostream& out);
void save_word2vec_text(const WordEmbeddings& embeddings, const std::filesystem::path& path);

/// Renders a value the way the text writer does.
std::string format_real(double value);

struct NormalizationPolicy {
    bool strip_compound_marker = false;
    char compound_marker = '#';
    bool strip_pos_suffix = false;
    char pos_separator = '_';
    bool lowercase = false;

    bool is_identity() const noexcept {
        return !strip_compound_marker && !strip_pos_suffix && !lowercase;
    }
};

/// Applies the policy to one lemma string. Idempotent.
///
/// A POS suffix is the text after the last separator when it looks like a
/// tag (one or more ASCII capitals or digits, starting with a capital);
/// stripping repeats until no tag suffix remains. A rule that would leave an
/// empty lemma is not applied.
std::string normalize_lemma(std::string_view lemma, const NormalizationPolicy& policy);

/// Normalizes every lemma. Lemmas that collide merge their row lists and
/// keep the best rank among their sources; the matrix is untouched.
WordEmbeddings normalize_vocab(const WordEmbeddings& embeddings, const NormalizationPolicy& policy);

/// Cosine similarity. Throws DegenerateInputError on a zero-norm argument
/// and ShapeError on a length mismatch.
double cosine(std::span<const double> a, std::span<const double> b);

enum class Metric { cosine, csls };

struct Neighbor {
    std::string lemma;
    double score = 0.0;
    std::size_t rank = 0;
};

struct NeighborOptions {
    Metric metric = Metric::cosine;
    /// Neighborhood size for the CSLS hub penalties.
    std::size_t csls_k = 10;
    /// Space the query lives in (already mapped into the searched space's
    /// coordinates). Needed for CSLS, where it supplies the penalty of each
    /// searched vector.
    const WordEmbeddings* query_space = nullptr;
};

/// Exact top-k lemmas of `space` for `query`. A lemma scores with its best
/// vector. Ties go to the lower frequency rank, then to the smaller lemma.
std::vector<Neighbor> nearest_neighbors(const WordEmbeddings& space, std::span<const double> query,
                                        std::size_t k, const NeighborOptions& options = {});

/// Rows scaled to unit length; zero rows stay zero.
RowMatrix unit_rows(const RowMatrix& matrix);

}  // namespace xling
