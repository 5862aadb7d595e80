#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include <Eigen/QR>

#include "xling/embeddings.hpp"
#include "xling/random.hpp"

namespace xling::testing {

inline double gaussian(Rng& rng) {
    double u1 = 1.0 - rng.uniform01();
    double u2 = rng.uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline RowMatrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
    RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = scale * gaussian(rng);
    return m;
}

/// Q factor of a Gaussian matrix, columns signed so that R has a positive diagonal.
inline RowMatrix random_orthogonal(Rng& rng, std::size_t d) {
    Eigen::MatrixXd g = gaussian_matrix(rng, d, d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (qr.matrixQR()(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

inline std::string word(const std::string& prefix, std::size_t i) { return prefix + std::to_string(i); }

/// One lemma per row, named prefix0, prefix1, ...
inline WordEmbeddings make_space(const std::string& language, const RowMatrix& m,
                                 const std::string& prefix = "w") {
    EmbeddingsBuilder b(language, static_cast<std::size_t>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Eigen::RowVectorXd r = m.row(i);
        b.add(word(prefix, static_cast<std::size_t>(i)),
              std::span<const double>(r.data(), static_cast<std::size_t>(r.size())));
    }
    return std::move(b).build();
}

inline WordEmbeddings space_of(const std::string& language, std::size_t dim,
                               const std::vector<std::pair<std::string, std::vector<double>>>& rows) {
    EmbeddingsBuilder b(language, dim);
    for (const auto& [l, v] : rows) b.add(l, v);
    return std::move(b).build();
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("xling-test-" + std::to_string(::getpid()) + "-" + std::to_string(++counter));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << bytes;
}

}  // namespace xling::testing
