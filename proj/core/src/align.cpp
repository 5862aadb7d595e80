#include "xling/align.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>

#include <Eigen/SVD>

#include "xling/error.hpp"
#include "xling/text.hpp"

namespace xling {

bool SeedLexicon::add(std::string source, std::string target) {
    auto pair = std::make_pair(std::move(source), std::move(target));
    if (std::find(pairs.begin(), pairs.end(), pair) != pairs.end()) return false;
    pairs.push_back(std::move(pair));
    return true;
}

SeedLexicon read_seed_lexicon(std::istream& in, std::string source_language,
                              std::string target_language) {
    SeedLexicon lex{std::move(source_language), std::move(target_language), {}};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(chomp(line));
        if (body.empty() || body.front() == '#') continue;
        auto fields = split_ws(body);
        if (fields.size() != 2)
            throw FormatError("expected '<source> <target>', found " +
                                  std::to_string(fields.size()) + " fields",
                              line_no);
        lex.add(std::string(fields[0]), std::string(fields[1]));
    }
    return lex;
}

SeedLexicon load_seed_lexicon(const std::filesystem::path& path, std::string source_language,
                              std::string target_language) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open seed lexicon " + path.string());
    try {
        return read_seed_lexicon(in, std::move(source_language), std::move(target_language));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

void save_seed_lexicon(const SeedLexicon& lexicon, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (const auto& [s, t] : lexicon.pairs) out << s << '\t' << t << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

double orthogonality_error(const RowMatrix& mapping) {
    if (mapping.rows() != mapping.cols()) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd gram = mapping.transpose() * mapping;
    gram -= Eigen::MatrixXd::Identity(gram.rows(), gram.cols());
    return gram.cwiseAbs().maxCoeff();
}

RowMatrix procrustes(const RowMatrix& source, const RowMatrix& target) {
    if (source.rows() != target.rows() || source.cols() != target.cols())
        throw ShapeError("procrustes inputs are " + std::to_string(source.rows()) + "x" +
                         std::to_string(source.cols()) + " and " + std::to_string(target.rows()) +
                         "x" + std::to_string(target.cols()));
    if (source.rows() == 0 || source.cols() == 0) throw ShapeError("procrustes needs paired rows");

    Eigen::MatrixXd m = source.transpose() * target;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RowMatrix w = svd.matrixU() * svd.matrixV().transpose();
    return w;
}

Eigen::VectorXd mean_top_k_similarity(const RowMatrix& unit_queries, const RowMatrix& unit_space,
                                      std::size_t k) {
    const Eigen::Index nq = unit_queries.rows();
    const Eigen::Index ns = unit_space.rows();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(nq);
    const auto kk = static_cast<Eigen::Index>(std::min<std::size_t>(k, static_cast<std::size_t>(ns)));
    if (kk == 0 || nq == 0) return out;

    constexpr Eigen::Index block = 512;
    std::vector<double> scratch(static_cast<std::size_t>(ns));
    for (Eigen::Index b0 = 0; b0 < nq; b0 += block) {
        Eigen::Index rows = std::min(block, nq - b0);
        RowMatrix sims = unit_queries.middleRows(b0, rows) * unit_space.transpose();
        for (Eigen::Index i = 0; i < rows; ++i) {
            std::copy(sims.row(i).data(), sims.row(i).data() + ns, scratch.begin());
            std::partial_sort(scratch.begin(), scratch.begin() + kk, scratch.end(),
                              std::greater<>());
            double sum = 0.0;
            for (Eigen::Index j = 0; j < kk; ++j) sum += scratch[static_cast<std::size_t>(j)];
            out(b0 + i) = sum / static_cast<double>(kk);
        }
    }
    return out;
}

std::vector<double> csls(std::span<const double> source_vector, const WordEmbeddings& target,
                         const WordEmbeddings& mapped_source, std::size_t k) {
    if (source_vector.size() != target.dim() || mapped_source.dim() != target.dim())
        throw ShapeError("CSLS inputs differ in dimension");
    Eigen::Map<const Eigen::RowVectorXd> x(source_vector.data(),
                                           static_cast<Eigen::Index>(source_vector.size()));
    double n = x.norm();
    if (n == 0.0) throw DegenerateInputError("CSLS query is a zero vector");
    RowMatrix unit_x = (x / n).eval();
    RowMatrix unit_target = unit_rows(target.matrix());

    Eigen::VectorXd cos = unit_target * unit_x.transpose();
    double r_query = mean_top_k_similarity(unit_x, unit_target, k)(0);
    Eigen::VectorXd r_target = mean_top_k_similarity(unit_target, unit_rows(mapped_source.matrix()), k);

    std::vector<double> scores(target.lemma_count(), -std::numeric_limits<double>::infinity());
    for (std::size_t rank = 0; rank < target.lemma_count(); ++rank)
        for (std::size_t r : target.rows_of(rank)) {
            auto ri = static_cast<Eigen::Index>(r);
            scores[rank] = std::max(scores[rank], 2.0 * cos(ri) - r_query - r_target(ri));
        }
    return scores;
}

namespace {

// Best partner so far: highest score, then lowest partner rank.
struct Best {
    double score = -std::numeric_limits<double>::infinity();
    std::size_t partner = std::numeric_limits<std::size_t>::max();

    void offer(double s, std::size_t p) {
        if (s > score || (s == score && p < partner)) {
            score = s;
            partner = p;
        }
    }
};

struct RowSubset {
    std::vector<std::size_t> rows;   // matrix rows of the retained lemmas
    std::vector<std::size_t> owner;  // lemma rank per retained row
    std::size_t lemma_count = 0;
    RowMatrix unit;
};

RowSubset frequent_rows(const WordEmbeddings& e, std::size_t limit) {
    RowSubset s;
    s.lemma_count = std::min(limit, e.lemma_count());
    for (std::size_t rank = 0; rank < s.lemma_count; ++rank)
        for (std::size_t r : e.rows_of(rank)) {
            s.rows.push_back(r);
            s.owner.push_back(rank);
        }
    s.unit.resize(static_cast<Eigen::Index>(s.rows.size()), static_cast<Eigen::Index>(e.dim()));
    for (std::size_t i = 0; i < s.rows.size(); ++i)
        s.unit.row(static_cast<Eigen::Index>(i)) = e.matrix().row(static_cast<Eigen::Index>(s.rows[i]));
    s.unit = unit_rows(s.unit);
    return s;
}

}  // namespace

SeedLexicon induce_lexicon(const WordEmbeddings& mapped_source, const WordEmbeddings& target,
                           const RefinementConfig& config) {
    if (mapped_source.dim() != target.dim())
        throw ShapeError("lexicon induction over spaces of different dimension");
    SeedLexicon lex{mapped_source.language(), target.language(), {}};
    if (config.induction_vocab_limit == 0) return lex;

    RowSubset src = frequent_rows(mapped_source, config.induction_vocab_limit);
    RowSubset tgt = frequent_rows(target, config.induction_vocab_limit);

    // r_T: each source row against the target side; r_S: each target row against the source side.
    Eigen::VectorXd r_src = mean_top_k_similarity(src.unit, tgt.unit, config.csls_k);
    Eigen::VectorXd r_tgt = mean_top_k_similarity(tgt.unit, src.unit, config.csls_k);

    std::vector<Best> best_for_source(src.lemma_count);
    std::vector<Best> best_for_target(tgt.lemma_count);
    const auto ns = static_cast<Eigen::Index>(src.rows.size());
    const auto nt = static_cast<Eigen::Index>(tgt.rows.size());
    constexpr Eigen::Index block = 256;
    for (Eigen::Index b0 = 0; b0 < ns; b0 += block) {
        Eigen::Index rows = std::min(block, ns - b0);
        RowMatrix sims = src.unit.middleRows(b0, rows) * tgt.unit.transpose();
        for (Eigen::Index i = 0; i < rows; ++i) {
            std::size_t s_lemma = src.owner[static_cast<std::size_t>(b0 + i)];
            double rs = r_src(b0 + i);
            for (Eigen::Index j = 0; j < nt; ++j) {
                std::size_t t_lemma = tgt.owner[static_cast<std::size_t>(j)];
                double score = 2.0 * sims(i, j) - rs - r_tgt(j);
                best_for_source[s_lemma].offer(score, t_lemma);
                best_for_target[t_lemma].offer(score, s_lemma);
            }
        }
    }

    for (std::size_t s = 0; s < src.lemma_count; ++s) {
        std::size_t t = best_for_source[s].partner;
        if (t < tgt.lemma_count && best_for_target[t].partner == s)
            lex.pairs.emplace_back(mapped_source.lemma(s), target.lemma(t));
    }
    return lex;
}

namespace {

void fill_rows(RowMatrix& dst, Eigen::Index at, std::span<const double> v) {
    for (std::size_t j = 0; j < v.size(); ++j) dst(at, static_cast<Eigen::Index>(j)) = v[j];
}

RowMatrix checked_procrustes(const RowMatrix& x, const RowMatrix& y) {
    RowMatrix w = procrustes(x, y);
    double err = orthogonality_error(w);
    if (!(err < 1e-6))
        throw AlignmentError("Procrustes solution is not orthogonal (error " + std::to_string(err) +
                             ")");
    return w;
}

}  // namespace

AlignmentResult align_supervised(const WordEmbeddings& source, const WordEmbeddings& target,
                                 const SeedLexicon& seed, const RefinementConfig& config) {
    if (source.dim() != target.dim())
        throw ShapeError("cannot align a " + std::to_string(source.dim()) + "-dim space to a " +
                         std::to_string(target.dim()) + "-dim space");
    const auto dim = static_cast<Eigen::Index>(source.dim());

    AlignmentResult result;
    std::vector<std::pair<std::size_t, std::size_t>> resolved;
    for (const auto& [s, t] : seed.pairs) {
        auto rs = source.rank_of(s);
        auto rt = target.rank_of(t);
        if (rs && rt)
            resolved.emplace_back(*rs, *rt);
        else
            ++result.seed_pairs_dropped;
    }
    result.seed_pairs_used = resolved.size();
    if (resolved.empty())
        throw AlignmentError("none of the " + std::to_string(seed.size()) +
                             " seed pairs resolve in both vocabularies");

    // Seed stage: first registered vector on each side.
    RowMatrix x(static_cast<Eigen::Index>(resolved.size()), dim);
    RowMatrix y(static_cast<Eigen::Index>(resolved.size()), dim);
    for (std::size_t i = 0; i < resolved.size(); ++i) {
        fill_rows(x, static_cast<Eigen::Index>(i), source.row(source.rows_of(resolved[i].first).front()));
        fill_rows(y, static_cast<Eigen::Index>(i), target.row(target.rows_of(resolved[i].second).front()));
    }
    result.mapping = checked_procrustes(x, y);

    for (std::size_t it = 0; it < config.iterations; ++it) {
        WordEmbeddings mapped = apply_mapping(source, result.mapping);
        SeedLexicon induced = induce_lexicon(mapped, target, config);
        result.induced_lexicon_size_per_iteration.push_back(induced.size());
        ++result.iterations_run;
        if (induced.empty()) continue;

        std::size_t n = 0;
        for (const auto& [s, t] : induced.pairs)
            n += source.lookup(s).size() * target.lookup(t).size();
        RowMatrix xs(static_cast<Eigen::Index>(n), dim);
        RowMatrix ys(static_cast<Eigen::Index>(n), dim);
        Eigen::Index at = 0;
        for (const auto& [s, t] : induced.pairs)
            for (auto sv : source.lookup(s))
                for (auto tv : target.lookup(t)) {
                    fill_rows(xs, at, sv);
                    fill_rows(ys, at, tv);
                    ++at;
                }
        result.mapping = checked_procrustes(xs, ys);
    }
    return result;
}

WordEmbeddings apply_mapping(const WordEmbeddings& embeddings, const RowMatrix& mapping) {
    if (static_cast<std::size_t>(mapping.rows()) != embeddings.dim())
        throw ShapeError("mapping has " + std::to_string(mapping.rows()) + " rows, space dim is " +
                         std::to_string(embeddings.dim()));
    RowMatrix mapped = embeddings.matrix() * mapping;
    return embeddings.with_matrix(std::move(mapped));
}

void write_matrix_text(const RowMatrix& matrix, std::ostream& out) {
    if (matrix.rows() != matrix.cols()) throw ShapeError("matrix text format holds square matrices");
    out << matrix.rows() << '\n';
    char buf[64];
    for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
        for (Eigen::Index j = 0; j < matrix.cols(); ++j) {
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), matrix(i, j),
                                           std::chars_format::general, 17);
            (void)ec;
            if (j) out << ' ';
            out.write(buf, ptr - buf);
        }
        out << '\n';
    }
}

RowMatrix read_matrix_text(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty matrix file");
    std::size_t dim = 0;
    auto head = trim(chomp(line));
    auto [p, ec] = std::from_chars(head.data(), head.data() + head.size(), dim);
    if (ec != std::errc() || p != head.data() + head.size() || dim == 0)
        throw FormatError("malformed dimension line", 1);
    RowMatrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) {
        if (!std::getline(in, line)) throw FormatError("expected " + std::to_string(dim) + " rows");
        auto fields = split_ws(trim(chomp(line)));
        if (fields.size() != dim) throw FormatError("wrong value count", i + 2);
        for (std::size_t j = 0; j < dim; ++j) {
            double v = 0.0;
            auto [q, e2] = std::from_chars(fields[j].data(), fields[j].data() + fields[j].size(), v);
            if (e2 != std::errc() || q != fields[j].data() + fields[j].size())
                throw FormatError("malformed number", i + 2);
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
    }
    return m;
}

void save_matrix_text(const RowMatrix& matrix, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    write_matrix_text(matrix, out);
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

RowMatrix load_matrix_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return read_matrix_text(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

}  // namespace xling
