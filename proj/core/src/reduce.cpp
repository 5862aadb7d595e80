#include "xling/reduce.hpp"

#include <Eigen/SVD>

#include "xling/error.hpp"

namespace xling {

PrincipalComponents principal_components(const RowMatrix& data, std::size_t count) {
    const Eigen::Index n = data.rows();
    const Eigen::Index d = data.cols();
    if (n < 2) throw InsufficientDataError("principal components need at least 2 rows");
    const auto k = static_cast<Eigen::Index>(count);
    if (k > std::min(n, d))
        throw InsufficientDataError("cannot extract " + std::to_string(count) +
                                    " components from " + std::to_string(n) + "x" +
                                    std::to_string(d) + " data");

    PrincipalComponents pc;
    pc.mean = data.colwise().mean();
    Eigen::MatrixXd centered = data.rowwise() - pc.mean;
    pc.directions.resize(k, d);
    pc.variances.resize(k);
    if (k == 0) return pc;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
    const auto& v = svd.matrixV();
    const auto& sigma = svd.singularValues();
    for (Eigen::Index c = 0; c < k; ++c) {
        Eigen::RowVectorXd dir = v.col(c).transpose();
        Eigen::Index at = 0;
        dir.cwiseAbs().maxCoeff(&at);
        if (dir(at) < 0) dir = -dir;
        pc.directions.row(c) = dir;
        pc.variances(c) = sigma(c) * sigma(c) / static_cast<double>(n - 1);
    }
    return pc;
}

RowMatrix post_process(const RowMatrix& data, std::size_t components) {
    const Eigen::Index n = data.rows();
    if (n < 2 || static_cast<std::size_t>(n) <= components)
        throw InsufficientDataError("post-processing " + std::to_string(components) +
                                    " components needs more than that many rows (have " +
                                    std::to_string(n) + ")");
    if (components > static_cast<std::size_t>(data.cols()))
        throw InsufficientDataError("cannot remove more components than the dimension");

    PrincipalComponents pc = principal_components(data, components);
    RowMatrix out = data.rowwise() - pc.mean;
    if (components > 0) {
        Eigen::MatrixXd coords = out * pc.directions.transpose();  // n x D
        out -= coords * pc.directions;
    }
    return out;
}

RowMatrix pca_project(const RowMatrix& data, std::size_t target_dim, Eigen::VectorXd* variances) {
    PrincipalComponents pc = principal_components(data, target_dim);
    RowMatrix centered = data.rowwise() - pc.mean;
    RowMatrix out = centered * pc.directions.transpose();
    if (variances) *variances = pc.variances;
    return out;
}

WordEmbeddings reduce(const WordEmbeddings& embeddings, const ReductionConfig& config) {
    if (config.target_dim == 0) throw ConfigError("target dimension must be positive");
    if (config.ppa_components >= config.target_dim)
        throw ConfigError("post-processing component count must be below the target dimension");
    if (embeddings.dim() == config.target_dim) return embeddings;
    if (embeddings.dim() < config.target_dim)
        throw InsufficientDataError("cannot reduce a " + std::to_string(embeddings.dim()) +
                                    "-dim space to " + std::to_string(config.target_dim));
    if (embeddings.vector_count() <= config.target_dim)
        throw InsufficientDataError("reduction to " + std::to_string(config.target_dim) +
                                    " dims needs more than that many vectors (have " +
                                    std::to_string(embeddings.vector_count()) + ")");

    RowMatrix m = post_process(embeddings.matrix(), config.ppa_components);
    m = pca_project(m, config.target_dim);
    m = post_process(m, config.ppa_components);
    return embeddings.with_matrix(std::move(m));
}

}  // namespace xling
