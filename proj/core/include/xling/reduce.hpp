#pragma once

#include <cstddef>

#include "xling/embeddings.hpp"

namespace xling {

struct ReductionConfig {
    std::size_t target_dim = 100;
    /// Top principal components removed before and after the projection.
    std::size_t ppa_components = 7;
};

/// Principal directions of mean-centered data, strongest first.
struct PrincipalComponents {
    Eigen::RowVectorXd mean;
    RowMatrix directions;       ///< one unit direction per row
    Eigen::VectorXd variances;  ///< sample variance along each direction
};

/// Top `count` principal components from the SVD of the centered data. Each
/// direction is signed so that its largest-magnitude entry is positive.
PrincipalComponents principal_components(const RowMatrix& data, std::size_t count);

/// Mean-centers the rows, then subtracts their projections onto the top
/// `components` principal directions of the centered data.
RowMatrix post_process(const RowMatrix& data, std::size_t components);

/// Coordinates of the centered rows along the top `target_dim` directions.
RowMatrix pca_project(const RowMatrix& data, std::size_t target_dim,
                      Eigen::VectorXd* variances = nullptr);

/// post_process -> PCA projection -> post_process. A space already at the
/// target dimension is returned unchanged.
WordEmbeddings reduce(const WordEmbeddings& embeddings, const ReductionConfig& config);

}  // namespace xling
