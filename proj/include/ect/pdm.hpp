/*
 * ect - Estimation-Correction-Tuning deformable shape fitting.
 *
 * File: include/ect/pdm.hpp
 *
 * Copyright 2026 The ect authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#ifndef ECT_PDM_HPP
#define ECT_PDM_HPP

#include "ect/error.hpp"
#include "ect/procrustes.hpp"
#include "ect/shape.hpp"

#include "Eigen/Core"
#include "Eigen/Eigenvalues"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

namespace ect {

/// Number of similarity coefficients heading every parameter vector.
inline constexpr Eigen::Index num_similarity_params = 4;

/**
 * Parameters of the compact linear shape model: four similarity
 * coefficients followed by the m non-rigid coefficients q.
 */
struct PdmParams
{
    Eigen::VectorXd values;

    PdmParams() = default;
    explicit PdmParams(Eigen::VectorXd v) : values(std::move(v)) {}

    static PdmParams zero(Eigen::Index size) { return PdmParams(Eigen::VectorXd::Zero(size)); }

    Eigen::Index size() const noexcept { return values.size(); }
    auto similarity() const { return values.head(num_similarity_params); }
    auto deformation() const { return values.tail(values.size() - num_similarity_params); }
};

/**
 * Point Distribution Model in its compact form s = mean + S p, where
 * S = [similarity bases | components] has orthonormal columns.
 *
 * The mean lives in the canonical Procrustes frame (centred, unit norm) and
 * the eigenvalues are variances in that frame.
 */
class PointDistributionModel
{
public:
    PointDistributionModel(Shape mean_shape, Eigen::MatrixXd similarity_bases, Eigen::MatrixXd components,
                           Eigen::VectorXd eigenvalues, double reference_scale = 1.0,
                           double retained_variance = 1.0)
        : mean_(std::move(mean_shape)), similarity_(std::move(similarity_bases)),
          components_(std::move(components)), eigenvalues_(std::move(eigenvalues)),
          reference_scale_(reference_scale), retained_variance_(retained_variance)
    {
        const Eigen::Index dim = mean_.coords().size();
        detail::require(similarity_.rows() == dim && similarity_.cols() == num_similarity_params,
                        ErrorKind::DimensionMismatch, "similarity bases must be 2n x 4");
        detail::require(components_.rows() == dim, ErrorKind::DimensionMismatch, "components must have 2n rows");
        detail::require(components_.cols() == eigenvalues_.size(), ErrorKind::DimensionMismatch,
                        "one eigenvalue per component required");
        detail::require(components_.cols() <= dim - num_similarity_params, ErrorKind::InvalidArgument,
                        "at most 2n - 4 components");
        detail::require(std::isfinite(reference_scale_) && reference_scale_ > 0.0, ErrorKind::InvalidArgument,
                        "reference scale must be positive");
        for (Eigen::Index j = 0; j < eigenvalues_.size(); ++j)
        {
            detail::require(std::isfinite(eigenvalues_[j]) && eigenvalues_[j] > 0.0, ErrorKind::InvalidArgument,
                            "eigenvalues must be positive");
            detail::require(j == 0 || eigenvalues_[j] <= eigenvalues_[j - 1], ErrorKind::InvalidArgument,
                            "eigenvalues must be sorted descending");
        }
        basis_.resize(dim, num_similarity_params + components_.cols());
        basis_ << similarity_, components_;
        detail::require(basis_.allFinite(), ErrorKind::InvalidArgument, "model bases must be finite");
        const Eigen::MatrixXd gram = basis_.transpose() * basis_;
        detail::require((gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() <= 1e-8,
                        ErrorKind::InvalidArgument, "model basis is not orthonormal");
    }

    std::size_t num_landmarks() const noexcept { return mean_.size(); }
    Eigen::Index num_modes() const noexcept { return components_.cols(); }
    Eigen::Index num_params() const noexcept { return basis_.cols(); }

    const Shape& mean_shape() const noexcept { return mean_; }
    const Eigen::MatrixXd& similarity_bases() const noexcept { return similarity_; }
    const Eigen::MatrixXd& components() const noexcept { return components_; }
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    /// Combined basis S (2n x (4+m)).
    const Eigen::MatrixXd& basis() const noexcept { return basis_; }
    /// Average centred Frobenius norm of the training shapes, in pixels.
    double reference_scale() const noexcept { return reference_scale_; }
    /// Fraction of the non-rigid training variance captured by the kept modes.
    double retained_variance() const noexcept { return retained_variance_; }

    /**
     * Diagonal of the pseudo-inverse prior precision: zero for the similarity
     * coefficients, 1/lambda_j for the non-rigid ones.
     */
    Eigen::VectorXd prior_precision() const
    {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(num_params());
        d.tail(num_modes()) = eigenvalues_.cwiseInverse();
        return d;
    }

private:
    Shape mean_;
    Eigen::MatrixXd similarity_;
    Eigen::MatrixXd components_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd basis_;
    double reference_scale_;
    double retained_variance_;
};

namespace detail {

/// Modified Gram-Schmidt with one re-orthogonalisation pass. Columns whose residual collapses are dropped.
inline Eigen::MatrixXd orthonormalize_columns(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& against,
                                              double drop_tol = 1e-10)
{
    std::vector<Eigen::VectorXd> kept;
    for (Eigen::Index c = 0; c < raw.cols(); ++c)
    {
        Eigen::VectorXd v = raw.col(c);
        const double original = v.norm();
        for (int pass = 0; pass < 2; ++pass)
        {
            for (Eigen::Index k = 0; k < against.cols(); ++k)
            {
                v -= against.col(k).dot(v) * against.col(k);
            }
            for (const auto& u : kept)
            {
                v -= u.dot(v) * u;
            }
        }
        const double norm = v.norm();
        if (norm > drop_tol * std::max(1.0, original))
        {
            kept.push_back(v / norm);
        }
    }
    Eigen::MatrixXd out(raw.rows(), static_cast<Eigen::Index>(kept.size()));
    for (std::size_t c = 0; c < kept.size(); ++c)
    {
        out.col(static_cast<Eigen::Index>(c)) = kept[c];
    }
    return out;
}

/// Flip each column so that its largest-magnitude entry is positive.
inline void canonicalize_signs(Eigen::MatrixXd& columns)
{
    for (Eigen::Index c = 0; c < columns.cols(); ++c)
    {
        Eigen::Index arg = 0;
        columns.col(c).cwiseAbs().maxCoeff(&arg);
        if (columns(arg, c) < 0.0)
        {
            columns.col(c) *= -1.0;
        }
    }
}

} /* namespace detail */

/**
 * Orthonormal similarity bases of a mean shape: Gram-Schmidt over
 * {mean, rot90(mean), (1,0,1,0,...), (0,1,0,1,...)}.
 */
inline Eigen::MatrixXd make_similarity_bases(const Shape& mean)
{
    const Eigen::Index dim = mean.coords().size();
    Eigen::MatrixXd raw(dim, num_similarity_params);
    for (Eigen::Index i = 0; i < dim / 2; ++i)
    {
        const double x = mean.coords()[2 * i];
        const double y = mean.coords()[2 * i + 1];
        raw.row(2 * i) << x, -y, 1.0, 0.0;
        raw.row(2 * i + 1) << y, x, 0.0, 1.0;
    }
    Eigen::MatrixXd bases = detail::orthonormalize_columns(raw, Eigen::MatrixXd(dim, 0));
    if (bases.cols() != num_similarity_params)
    {
        detail::fail(ErrorKind::AlignmentDegenerate, "mean shape does not span a 4-dimensional similarity space");
    }
    return bases;
}

struct PdmTrainOptions
{
    double variance_retained = 0.95;
    /// When set, keeps exactly this many modes (capped at the numerical rank).
    std::optional<Eigen::Index> component_count;
    int procrustes_max_iters = 100;
    double procrustes_tol = 1e-10;
};

/**
 * Trains a PDM: Procrustes alignment, similarity bases from the mean,
 * then PCA of the aligned shapes after the similarity subspace has been
 * projected out, so the components are orthogonal to it by construction.
 */
inline PointDistributionModel train_pdm(const std::vector<Shape>& shapes, const PdmTrainOptions& options = {})
{
    detail::require(options.variance_retained > 0.0 && options.variance_retained <= 1.0,
                    ErrorKind::InvalidArgument, "variance_retained must lie in (0, 1]");
    if (shapes.size() < 2)
    {
        detail::fail(ErrorKind::InsufficientData, "train_pdm needs at least 2 shapes");
    }
    const ProcrustesResult gpa = procrustes_align(shapes, options.procrustes_max_iters, options.procrustes_tol);
    const Eigen::MatrixXd similarity = make_similarity_bases(gpa.mean);
    const Eigen::Index dim = gpa.mean.coords().size();
    const auto count = static_cast<Eigen::Index>(shapes.size());

    Eigen::MatrixXd residuals(dim, count);
    for (Eigen::Index k = 0; k < count; ++k)
    {
        residuals.col(k) = gpa.aligned[static_cast<std::size_t>(k)].coords() - gpa.mean.coords();
    }
    residuals -= similarity * (similarity.transpose() * residuals);
    const Eigen::MatrixXd covariance = residuals * residuals.transpose() / static_cast<double>(count - 1);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(covariance);
    // Eigen sorts ascending.
    const Eigen::VectorXd values = eig.eigenvalues().reverse();
    const Eigen::MatrixXd vectors = eig.eigenvectors().rowwise().reverse();

    const double largest = std::max(values.size() > 0 ? values[0] : 0.0, 0.0);
    const double rank_floor = std::max(1e-10 * largest, 1e-20);
    Eigen::Index rank = 0;
    while (rank < values.size() && rank < dim - num_similarity_params && values[rank] > rank_floor)
    {
        ++rank;
    }
    double total = 0.0;
    for (Eigen::Index j = 0; j < values.size(); ++j)
    {
        total += std::max(values[j], 0.0);
    }

    Eigen::Index keep = rank;
    if (options.component_count)
    {
        detail::require(*options.component_count >= 0, ErrorKind::InvalidArgument, "component count must be >= 0");
        keep = std::min(*options.component_count, rank);
    } else if (rank > 0)
    {
        double cumulative = 0.0;
        keep = 0;
        while (keep < rank)
        {
            cumulative += values[keep];
            ++keep;
            if (cumulative >= options.variance_retained * total * (1.0 - 1e-12))
            {
                break;
            }
        }
    }
    double kept_variance = 0.0;
    for (Eigen::Index j = 0; j < keep; ++j)
    {
        kept_variance += values[j];
    }

    Eigen::MatrixXd components = detail::orthonormalize_columns(vectors.leftCols(keep), similarity, 0.0);
    detail::canonicalize_signs(components);

    double reference_scale = 0.0;
    for (const auto& s : shapes)
    {
        reference_scale += centered_coords(s).norm();
    }
    reference_scale /= static_cast<double>(shapes.size());

    return PointDistributionModel(gpa.mean, similarity, components, values.head(keep), reference_scale,
                                  total > 0.0 ? kept_variance / total : 1.0);
}

/// s = mean + S p.
inline Shape generate_shape(const PointDistributionModel& model, const PdmParams& params)
{
    detail::require(params.size() == model.num_params(), ErrorKind::DimensionMismatch,
                    "generate_shape: parameter length does not match the model");
    return Shape(model.mean_shape().coords() + model.basis() * params.values);
}

/// Unweighted least-squares parameters of a shape: S^T (shape - mean).
inline PdmParams project_shape(const PointDistributionModel& model, const Shape& shape)
{
    detail::require(shape.size() == model.num_landmarks(), ErrorKind::DimensionMismatch,
                    "project_shape: landmark count does not match the model");
    return PdmParams(model.basis().transpose() * (shape.coords() - model.mean_shape().coords()));
}

/// Mahalanobis norm of the non-rigid coefficients, sum q_j^2 / lambda_j.
inline double prior_penalty(const PointDistributionModel& model, const PdmParams& params)
{
    detail::require(params.size() == model.num_params(), ErrorKind::DimensionMismatch,
                    "prior_penalty: parameter length does not match the model");
    const auto q = params.deformation();
    return (q.array().square() / model.eigenvalues().array()).sum();
}

/**
 * The global similarity encoded by the first four coefficients, i.e. the
 * transform taking the canonical mean onto mean + S_sim p_sim.
 */
inline SimilarityTransform similarity_of(const PointDistributionModel& model, const PdmParams& params)
{
    detail::require(params.size() == model.num_params(), ErrorKind::DimensionMismatch,
                    "similarity_of: parameter length does not match the model");
    const Shape rigid(model.mean_shape().coords() + model.similarity_bases() * params.similarity());
    return optimal_similarity(model.mean_shape(), rigid);
}

/// Similarity coefficients that place the canonical mean with the given transform.
inline Eigen::Vector4d similarity_params(const PointDistributionModel& model, const SimilarityTransform& transform)
{
    const Shape posed = apply_similarity(transform, model.mean_shape());
    return model.similarity_bases().transpose() * (posed.coords() - model.mean_shape().coords());
}

} /* namespace ect */

#endif /* ECT_PDM_HPP */
