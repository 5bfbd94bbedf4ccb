#pragma once

#include <vector>

#include <Eigen/Core>

namespace annotweave {

using ColorSamples = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

/// Full-covariance Gaussian mixture over RGB colours.
class GaussianMixture {
 public:
  struct Component {
    double weight = 0.0;
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Identity();
    // Cached from covariance by refresh().
    Eigen::Matrix3d inverse = Eigen::Matrix3d::Identity();
    double log_norm = 0.0;  // log(weight) - 0.5 * log((2 pi)^3 det)
  };

  explicit GaussianMixture(int components = 5) : components_(static_cast<std::size_t>(components)) {}

  [[nodiscard]] int size() const { return static_cast<int>(components_.size()); }
  [[nodiscard]] const std::vector<Component>& components() const { return components_; }
  [[nodiscard]] bool empty() const;

  /// Maximum-likelihood refit from hard assignments (assignment[i] in [0, size())).
  /// Components left without samples get weight 0; `regularization` is added to every covariance diagonal.
  void fit(const ColorSamples& samples, const std::vector<int>& assignment, double regularization);

  /// log sum_k w_k N(color | mean_k, cov_k).
  [[nodiscard]] double log_likelihood(const Eigen::Vector3d& color) const;

  /// argmax_k w_k N(color | mean_k, cov_k).
  [[nodiscard]] int most_likely_component(const Eigen::Vector3d& color) const;

  /// Deterministic initial clustering by repeated principal-axis splits of the widest cluster.
  [[nodiscard]] static std::vector<int> split_clusters(const ColorSamples& samples, int clusters);

 private:
  [[nodiscard]] double component_log_density(const Component& c, const Eigen::Vector3d& color) const;

  std::vector<Component> components_;
};

}  // namespace annotweave
