#include "xling/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include "xling/align.hpp"
#include "xling/error.hpp"
#include "xling/text.hpp"

namespace xling {

WordEmbeddings::WordEmbeddings(std::string language, RowMatrix matrix,
                               std::vector<std::string> lemmas,
                               std::vector<std::vector<std::size_t>> rows)
    : language_(std::move(language)),
      matrix_(std::move(matrix)),
      lemmas_(std::move(lemmas)),
      rows_(std::move(rows)) {
    if (lemmas_.empty()) throw FormatError("embeddings have no entries");
    if (lemmas_.size() != rows_.size()) throw FormatError("lemma and row-list counts differ");
    if (matrix_.cols() == 0) throw FormatError("embedding dimension must be positive");

    row_owner_.assign(vector_count(), lemmas_.size());
    for (std::size_t r = 0; r < lemmas_.size(); ++r) {
        if (lemmas_[r].empty()) throw FormatError("empty lemma at rank " + std::to_string(r));
        if (rows_[r].empty()) throw FormatError("lemma '" + lemmas_[r] + "' has no vectors");
        for (std::size_t row : rows_[r]) {
            if (row >= vector_count())
                throw FormatError("lemma '" + lemmas_[r] + "' refers to missing row " +
                                  std::to_string(row));
            if (row_owner_[row] != lemmas_.size())
                throw FormatError("row " + std::to_string(row) + " is owned twice");
            row_owner_[row] = r;
        }
        if (!index_.emplace(lemmas_[r], r).second)
            throw FormatError("duplicate lemma '" + lemmas_[r] + "'");
    }
    for (std::size_t row = 0; row < row_owner_.size(); ++row)
        if (row_owner_[row] == lemmas_.size())
            throw FormatError("row " + std::to_string(row) + " has no lemma");
}

std::optional<std::size_t> WordEmbeddings::rank_of(std::string_view lemma) const {
    auto it = index_.find(lemma);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::span<const double>> WordEmbeddings::lookup(std::string_view lemma) const {
    std::vector<std::span<const double>> out;
    if (auto rank = rank_of(lemma)) {
        for (std::size_t r : rows_[*rank]) out.push_back(row(r));
    }
    return out;
}

Eigen::VectorXd WordEmbeddings::mean_vector(std::size_t rank) const {
    const auto& rs = rows_.at(rank);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(matrix_.cols());
    for (std::size_t r : rs) sum += matrix_.row(r).transpose();
    return sum / static_cast<double>(rs.size());
}

WordEmbeddings WordEmbeddings::with_matrix(RowMatrix matrix) const {
    if (matrix.rows() != matrix_.rows())
        throw ShapeError("replacement matrix has " + std::to_string(matrix.rows()) +
                         " rows, expected " + std::to_string(matrix_.rows()));
    return WordEmbeddings(language_, std::move(matrix), lemmas_, rows_);
}

EmbeddingsBuilder::EmbeddingsBuilder(std::string language, std::size_t dim)
    : language_(std::move(language)), dim_(dim) {
    if (dim_ == 0) throw FormatError("embedding dimension must be positive");
}

void EmbeddingsBuilder::add(std::string_view lemma, std::span<const double> vector) {
    if (vector.size() != dim_)
        throw ShapeError("vector for '" + std::string(lemma) + "' has length " +
                         std::to_string(vector.size()) + ", expected " + std::to_string(dim_));
    std::size_t row = vector_count();
    data_.insert(data_.end(), vector.begin(), vector.end());
    auto it = index_.find(lemma);
    if (it == index_.end()) {
        index_.emplace(std::string(lemma), lemmas_.size());
        lemmas_.emplace_back(lemma);
        rows_.push_back({row});
    } else {
        rows_[it->second].push_back(row);
    }
}

WordEmbeddings EmbeddingsBuilder::build() && {
    RowMatrix m(static_cast<Eigen::Index>(vector_count()), static_cast<Eigen::Index>(dim_));
    std::copy(data_.begin(), data_.end(), m.data());
    return WordEmbeddings(std::move(language_), std::move(m), std::move(lemmas_), std::move(rows_));
}

bool structurally_equal(const WordEmbeddings& a, const WordEmbeddings& b, double tolerance) {
    if (a.dim() != b.dim() || a.lemmas() != b.lemmas()) return false;
    for (std::size_t r = 0; r < a.lemma_count(); ++r) {
        const auto& ra = a.rows_of(r);
        const auto& rb = b.rows_of(r);
        if (ra.size() != rb.size()) return false;
        for (std::size_t i = 0; i < ra.size(); ++i) {
            auto va = a.row(ra[i]);
            auto vb = b.row(rb[i]);
            for (std::size_t j = 0; j < va.size(); ++j)
                if (!(std::abs(va[j] - vb[j]) <= tolerance)) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------
// word2vec text format

namespace {

std::size_t parse_count(std::string_view token, std::size_t line, const char* what) {
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size())
        throw FormatError(std::string("malformed ") + what + " '" + std::string(token) + "'", line);
    return value;
}

double parse_real(std::string_view token, std::size_t line) {
    double value = 0.0;
    const char* first = token.data();
    if (!token.empty() && token.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, token.data() + token.size(), value);
    if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value))
        throw FormatError("malformed number '" + std::string(token) + "'", line);
    return value;
}

std::vector<std::string_view> split_spaces(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i <= line.size()) {
        std::size_t j = line.find(' ', i);
        if (j == std::string_view::npos) j = line.size();
        out.push_back(line.substr(i, j - i));
        i = j + 1;
    }
    // Tolerate trailing spaces, which many writers emit.
    while (out.size() > 1 && out.back().empty()) out.pop_back();
    return out;
}

}  // namespace

WordEmbeddings read_word2vec_text(std::istream& in, const std::string& language) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw FormatError("missing header", 1);
    auto header = split_ws(chomp(line));
    if (header.size() != 2) throw FormatError("header must be '<count> <dim>'", 1);
    std::size_t count = parse_count(header[0], 1, "vector count");
    std::size_t dim = parse_count(header[1], 1, "dimension");
    if (dim == 0) throw FormatError("dimension must be positive", 1);
    if (count == 0) throw FormatError("vector count must be positive", 1);

    EmbeddingsBuilder builder(language, dim);
    std::vector<double> values(dim);
    std::size_t read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = chomp(line);
        if (body.empty()) continue;
        if (read == count)
            throw FormatError("more vectors than the header count " + std::to_string(count),
                              line_no);
        auto fields = split_spaces(body);
        if (fields.size() != dim + 1)
            throw FormatError("expected " + std::to_string(dim) + " values, found " +
                                  std::to_string(fields.size() - 1),
                              line_no);
        if (fields[0].empty()) throw FormatError("empty token", line_no);
        if (!is_valid_utf8(fields[0])) throw FormatError("token is not valid UTF-8", line_no);
        for (std::size_t j = 0; j < dim; ++j) values[j] = parse_real(fields[j + 1], line_no);
        builder.add(fields[0], values);
        ++read;
    }
    if (read != count)
        throw FormatError("header announces " + std::to_string(count) + " vectors, found " +
                          std::to_string(read));
    return std::move(builder).build();
}

WordEmbeddings load_word2vec_text(const std::filesystem::path& path, const std::string& language) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return read_word2vec_text(in, language);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::string format_real(double value) {
    char buf[64];
    auto [ptr, ec] =
        std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, kTextPrecision);
    (void)ec;
    return std::string(buf, ptr);
}

void write_word2vec_text(const WordEmbeddings& embeddings, std::ostream& out) {
    if (embeddings.empty()) throw FormatError("refusing to write embeddings without entries");
    out << embeddings.vector_count() << ' ' << embeddings.dim() << '\n';
    char buf[64];
    std::string line;
    for (std::size_t rank = 0; rank < embeddings.lemma_count(); ++rank) {
        for (std::size_t row : embeddings.rows_of(rank)) {
            line = embeddings.lemma(rank);
            for (double v : embeddings.row(row)) {
                auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                               std::chars_format::general, kTextPrecision);
                (void)ec;
                line.push_back(' ');
                line.append(buf, ptr);
            }
            line.push_back('\n');
            out << line;
        }
    }
}

void save_word2vec_text(const WordEmbeddings& embeddings, const std::filesystem::path& path) {
    if (embeddings.empty()) throw FormatError("refusing to write embeddings without entries");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    write_word2vec_text(embeddings, out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Vocabulary normalization

namespace {

bool is_tag(std::string_view s) {
    if (s.empty() || s.front() < 'A' || s.front() > 'Z') return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9'); });
}

}  // namespace

std::string normalize_lemma(std::string_view lemma, const NormalizationPolicy& policy) {
    std::string out(lemma);
    if (policy.strip_compound_marker) {
        std::string stripped;
        stripped.reserve(out.size());
        for (char c : out)
            if (c != policy.compound_marker) stripped.push_back(c);
        if (!stripped.empty()) out = std::move(stripped);
    }
    if (policy.strip_pos_suffix) {
        for (;;) {
            auto pos = out.rfind(policy.pos_separator);
            if (pos == std::string::npos || pos == 0) break;
            if (!is_tag(std::string_view(out).substr(pos + 1))) break;
            out.erase(pos);
        }
    }
    if (policy.lowercase) out = utf8_lower(out);
    return out;
}

WordEmbeddings normalize_vocab(const WordEmbeddings& embeddings, const NormalizationPolicy& policy) {
    if (policy.is_identity()) return embeddings;
    // Ranks are visited in order, so the first source of a merged lemma holds
    // the best rank and merged row lists follow source rank order.
    std::vector<std::string> lemmas;
    std::vector<std::vector<std::size_t>> rows;
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t rank = 0; rank < embeddings.lemma_count(); ++rank) {
        std::string norm = normalize_lemma(embeddings.lemma(rank), policy);
        const auto& src_rows = embeddings.rows_of(rank);
        auto it = index.find(norm);
        if (it == index.end()) {
            index.emplace(norm, lemmas.size());
            lemmas.push_back(std::move(norm));
            rows.push_back(src_rows);
        } else {
            auto& dst = rows[it->second];
            dst.insert(dst.end(), src_rows.begin(), src_rows.end());
        }
    }
    return WordEmbeddings(embeddings.language(), embeddings.matrix(), std::move(lemmas),
                          std::move(rows));
}

// ---------------------------------------------------------------------------
// Similarity

double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw ShapeError("cosine of vectors with lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw DegenerateInputError("cosine of a zero vector");
    double c = dot / (std::sqrt(na) * std::sqrt(nb));
    return std::clamp(c, -1.0, 1.0);
}

RowMatrix unit_rows(const RowMatrix& matrix) {
    RowMatrix out = matrix;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        double n = out.row(i).norm();
        if (n > 0.0) out.row(i) /= n;
    }
    return out;
}

std::vector<Neighbor> nearest_neighbors(const WordEmbeddings& space, std::span<const double> query,
                                        std::size_t k, const NeighborOptions& options) {
    if (k == 0) throw InputError("k must be at least 1");
    if (query.size() != space.dim())
        throw ShapeError("query has length " + std::to_string(query.size()) + ", space dim is " +
                         std::to_string(space.dim()));
    Eigen::Map<const Eigen::RowVectorXd> q(query.data(), static_cast<Eigen::Index>(query.size()));
    double qn = q.norm();
    if (qn == 0.0) throw DegenerateInputError("nearest-neighbor query is a zero vector");

    RowMatrix unit_space = unit_rows(space.matrix());
    Eigen::VectorXd row_scores = unit_space * (q.transpose() / qn);

    if (options.metric == Metric::csls) {
        if (options.query_space == nullptr)
            throw InputError("CSLS scoring needs the query's own (mapped) space");
        if (options.query_space->dim() != space.dim())
            throw ShapeError("query space and searched space differ in dimension");
        RowMatrix unit_query = (q / qn).eval();
        double r_query = mean_top_k_similarity(unit_query, unit_space, options.csls_k)(0);
        Eigen::VectorXd r_rows = mean_top_k_similarity(
            unit_space, unit_rows(options.query_space->matrix()), options.csls_k);
        row_scores = (2.0 * row_scores.array() - r_query - r_rows.array()).matrix();
    }

    std::vector<Neighbor> all;
    all.reserve(space.lemma_count());
    for (std::size_t rank = 0; rank < space.lemma_count(); ++rank) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t r : space.rows_of(rank)) best = std::max(best, row_scores(r));
        all.push_back({space.lemma(rank), best, rank});
    }
    auto better = [](const Neighbor& a, const Neighbor& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.rank != b.rank) return a.rank < b.rank;
        return a.lemma < b.lemma;
    };
    std::size_t take = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(take), all.end(),
                      better);
    all.resize(take);
    return all;
}

}  // namespace xling
