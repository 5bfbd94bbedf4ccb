#include "annotweave/mask/gmm.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace annotweave {

bool GaussianMixture::empty() const {
  for (const auto& c : components_) {
    if (c.weight > 0.0) return false;
  }
  return true;
}

void GaussianMixture::fit(const ColorSamples& samples, const std::vector<int>& assignment, double regularization) {
  const int k = size();
  std::vector<Eigen::Vector3d> sums(k, Eigen::Vector3d::Zero());
  std::vector<Eigen::Matrix3d> prods(k, Eigen::Matrix3d::Zero());
  std::vector<long> counts(k, 0);
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const int c = assignment[static_cast<std::size_t>(i)];
    const Eigen::Vector3d x = samples.row(i).transpose();
    sums[c] += x;
    prods[c] += x * x.transpose();
    ++counts[c];
  }

  const double total = static_cast<double>(samples.rows());
  for (int c = 0; c < k; ++c) {
    auto& comp = components_[c];
    if (counts[c] == 0) {
      comp = Component{};
      continue;
    }
    const double n = static_cast<double>(counts[c]);
    comp.weight = n / total;
    comp.mean = sums[c] / n;
    comp.covariance = prods[c] / n - comp.mean * comp.mean.transpose();
    comp.covariance = 0.5 * (comp.covariance + comp.covariance.transpose()).eval();
    comp.covariance.diagonal().array() += regularization;

    Eigen::LLT<Eigen::Matrix3d> llt(comp.covariance);
    if (llt.info() != Eigen::Success) {
      // Rounding pushed an eigenvalue negative; fall back to the diagonal.
      comp.covariance = comp.covariance.diagonal().cwiseMax(regularization).asDiagonal();
      llt.compute(comp.covariance);
    }
    const Eigen::Matrix3d l = llt.matrixL();
    const double log_det = 2.0 * l.diagonal().array().log().sum();
    comp.inverse = llt.solve(Eigen::Matrix3d::Identity());
    comp.log_norm = std::log(comp.weight) - 0.5 * (3.0 * std::log(2.0 * std::numbers::pi) + log_det);
  }
}

double GaussianMixture::component_log_density(const Component& c, const Eigen::Vector3d& color) const {
  const Eigen::Vector3d d = color - c.mean;
  return c.log_norm - 0.5 * d.dot(c.inverse * d);
}

double GaussianMixture::log_likelihood(const Eigen::Vector3d& color) const {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& c : components_) {
    if (c.weight > 0.0) best = std::max(best, component_log_density(c, color));
  }
  if (!std::isfinite(best)) return best;
  double s = 0.0;
  for (const auto& c : components_) {
    if (c.weight > 0.0) s += std::exp(component_log_density(c, color) - best);
  }
  return best + std::log(s);
}

int GaussianMixture::most_likely_component(const Eigen::Vector3d& color) const {
  int best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < size(); ++k) {
    if (components_[k].weight <= 0.0) continue;
    const double v = component_log_density(components_[k], color);
    if (v > best_v) {
      best_v = v;
      best = k;
    }
  }
  return best;
}

std::vector<int> GaussianMixture::split_clusters(const ColorSamples& samples, int clusters) {
  std::vector<int> label(static_cast<std::size_t>(samples.rows()), 0);
  if (samples.rows() == 0) return label;

  struct Stats {
    Eigen::Vector3d mean;
    Eigen::Vector3d axis;
    double spread;
  };
  auto stats_of = [&](int c) {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    Eigen::Matrix3d prod = Eigen::Matrix3d::Zero();
    long n = 0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      if (label[i] != c) continue;
      const Eigen::Vector3d x = samples.row(i).transpose();
      sum += x;
      prod += x * x.transpose();
      ++n;
    }
    Stats s{Eigen::Vector3d::Zero(), Eigen::Vector3d::UnitX(), 0.0};
    if (n == 0) return s;
    s.mean = sum / static_cast<double>(n);
    const Eigen::Matrix3d cov = prod / static_cast<double>(n) - s.mean * s.mean.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    s.axis = eig.eigenvectors().col(2);
    s.spread = eig.eigenvalues()(2);
    return s;
  };

  std::vector<Stats> stats{stats_of(0)};
  std::vector<bool> splittable{true};
  while (static_cast<int>(stats.size()) < clusters) {
    int widest = -1;
    for (int c = 0; c < static_cast<int>(stats.size()); ++c) {
      if (splittable[c] && stats[c].spread > 1e-9 && (widest < 0 || stats[c].spread > stats[widest].spread)) {
        widest = c;
      }
    }
    if (widest < 0) break;

    const int fresh = static_cast<int>(stats.size());
    const double threshold = stats[widest].axis.dot(stats[widest].mean);
    long moved = 0, stayed = 0;
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
      if (label[i] != widest) continue;
      if (samples.row(i).dot(stats[widest].axis.transpose()) > threshold) {
        label[i] = fresh;
        ++moved;
      } else {
        ++stayed;
      }
    }
    if (moved == 0 || stayed == 0) {
      for (auto& l : label) {
        if (l == fresh) l = widest;
      }
      splittable[widest] = false;
      continue;
    }
    stats[widest] = stats_of(widest);
    stats.push_back(stats_of(fresh));
    splittable.push_back(true);
  }
  return label;
}

}  // namespace annotweave
