#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bplab::data {

/// Train-fitted dimension reducer + [0, pi] scaler. PCA on z-scored
/// features when d > target, identity otherwise.
class FeatureReducer {
public:
    static FeatureReducer fit(const std::vector<double>& train, std::size_t d, std::size_t target);

    std::vector<double> transform(const std::vector<double>& rows, std::size_t d) const;
    std::size_t output_dim() const { return out_dim_; }
    std::string provenance() const;

private:
    std::vector<double> project(const std::vector<double>& rows, std::size_t d) const;

    std::size_t in_dim_ = 0;
    std::size_t out_dim_ = 0;
    bool pca_ = false;
    std::vector<double> mean_, scale_;
    std::vector<double> components_;  // out_dim x in_dim
    std::vector<double> lo_, hi_;
};

}  // namespace bplab::data
