#include "reducer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "bplab/error.hpp"

namespace bplab::data {

FeatureReducer FeatureReducer::fit(const std::vector<double>& train, std::size_t d, std::size_t target) {
    if (d == 0 || train.empty() || train.size() % d != 0) throw DataError("reducer needs a non-empty train matrix");
    const std::size_t n = train.size() / d;
    FeatureReducer r;
    r.in_dim_ = d;
    r.pca_ = d > target;
    r.out_dim_ = r.pca_ ? target : d;

    if (r.pca_) {
        using Eigen::Index;
        Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(
            train.data(), static_cast<Index>(n), static_cast<Index>(d));
        const Eigen::RowVectorXd mean = x.colwise().mean();
        Eigen::MatrixXd centered = x.rowwise() - mean;
        Eigen::RowVectorXd sd = (centered.array().square().colwise().sum() / static_cast<double>(n)).sqrt();
        for (Index j = 0; j < sd.size(); ++j) {
            if (sd(j) < 1e-12) sd(j) = 1.0;  // constant column
        }
        const Eigen::MatrixXd z = centered.array().rowwise() / sd.array();
        const Eigen::MatrixXd cov = (z.transpose() * z) / static_cast<double>(n);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
        if (eig.info() != Eigen::Success) throw DataError("PCA eigen-decomposition failed");

        r.mean_.assign(mean.data(), mean.data() + d);
        r.scale_.assign(sd.data(), sd.data() + d);
        r.components_.resize(r.out_dim_ * d);
        for (std::size_t k = 0; k < r.out_dim_; ++k) {
            // Eigenvalues ascend; take from the top.
            Eigen::VectorXd v = eig.eigenvectors().col(static_cast<Index>(d - 1 - k));
            Index arg = 0;
            v.cwiseAbs().maxCoeff(&arg);
            if (v(arg) < 0) v = -v;
            std::copy(v.data(), v.data() + d, r.components_.begin() + static_cast<std::ptrdiff_t>(k * d));
        }
    }

    const auto projected = r.project(train, d);
    r.lo_.assign(r.out_dim_, INFINITY);
    r.hi_.assign(r.out_dim_, -INFINITY);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < r.out_dim_; ++k) {
            const double v = projected[i * r.out_dim_ + k];
            r.lo_[k] = std::min(r.lo_[k], v);
            r.hi_[k] = std::max(r.hi_[k], v);
        }
    }
    return r;
}

std::vector<double> FeatureReducer::project(const std::vector<double>& rows, std::size_t d) const {
    if (d != in_dim_) throw DataError("reducer input dimension mismatch");
    if (!pca_) return rows;
    const std::size_t n = rows.size() / d;
    std::vector<double> out(n * out_dim_, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < out_dim_; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                acc += components_[k * d + j] * (rows[i * d + j] - mean_[j]) / scale_[j];
            }
            out[i * out_dim_ + k] = acc;
        }
    }
    return out;
}

std::vector<double> FeatureReducer::transform(const std::vector<double>& rows, std::size_t d) const {
    auto out = project(rows, d);
    const std::size_t n = out.size() / out_dim_;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < out_dim_; ++k) {
            double& v = out[i * out_dim_ + k];
            const double span = hi_[k] - lo_[k];
            v = span > 0.0 ? (v - lo_[k]) / span * std::numbers::pi : 0.0;
            v = std::clamp(v, 0.0, std::numbers::pi);
        }
    }
    return out;
}

std::string FeatureReducer::provenance() const {
    if (!pca_) return "identity(d=" + std::to_string(in_dim_) + ") + minmax[0,pi] fit=train";
    return "pca(d=" + std::to_string(in_dim_) + "->" + std::to_string(out_dim_) +
           ", zscore, fit=train) + minmax[0,pi] fit=train";
}

}  // namespace bplab::data
