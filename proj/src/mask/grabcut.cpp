#include "annotweave/mask/grabcut.hpp"

#include <algorithm>
#include <cmath>

#include "annotweave/core/error.hpp"
#include "annotweave/mask/maxflow.hpp"

namespace annotweave {
namespace {

// Neighbour offsets covering each undirected 8-connected pair once.
constexpr int kNbDx[] = {1, 0, 1, -1};
constexpr int kNbDy[] = {0, 1, 1, 1};

struct RegionTerms {
  BoundingBox region;
  std::vector<double> cost_fg;  // per region pixel, row-major
  std::vector<double> cost_bg;
  std::vector<double> weights;  // 4 per pixel, matching kNb*; 0 where the neighbour is outside
};

double hard_cost(const GrabCutParams& p) { return 9.0 * p.gamma; }

double contrast_beta(const RgbImage& img, const BoundingBox& r) {
  double sum = 0.0;
  long count = 0;
  for (int y = r.ul_y; y < r.lr_y; ++y) {
    for (int x = r.ul_x; x < r.lr_x; ++x) {
      const Eigen::Vector3d c = img.color(x, y);
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kNbDx[k], ny = y + kNbDy[k];
        if (nx < r.ul_x || nx >= r.lr_x || ny >= r.lr_y) continue;
        sum += (c - img.color(nx, ny)).squaredNorm();
        ++count;
      }
    }
  }
  if (count == 0 || sum <= 1e-12) return 0.0;
  return 1.0 / (2.0 * sum / static_cast<double>(count));
}

RegionTerms build_terms(const GrabCutState& s) {
  RegionTerms t;
  t.region = s.working_region();
  const auto& r = t.region;
  const std::size_t n = static_cast<std::size_t>(r.area());
  t.cost_fg.resize(n);
  t.cost_bg.resize(n);
  t.weights.assign(n * 4, 0.0);
  const double lambda = hard_cost(s.params);
  const double beta = contrast_beta(s.image, r);

  std::size_t i = 0;
  for (int y = r.ul_y; y < r.lr_y; ++y) {
    for (int x = r.ul_x; x < r.lr_x; ++x, ++i) {
      const TrimapLabel l = s.trimap(y, x);
      const Eigen::Vector3d c = s.image.color(x, y);
      if (l == TrimapLabel::SureForeground) {
        t.cost_fg[i] = 0.0;
        t.cost_bg[i] = lambda;
      } else if (l == TrimapLabel::SureBackground) {
        t.cost_fg[i] = lambda;
        t.cost_bg[i] = 0.0;
      } else {
        t.cost_fg[i] = -s.fg_model.log_likelihood(c);
        t.cost_bg[i] = -s.bg_model.log_likelihood(c);
      }
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kNbDx[k], ny = y + kNbDy[k];
        if (nx < r.ul_x || nx >= r.lr_x || ny >= r.lr_y) continue;
        const double dist = (kNbDx[k] != 0 && kNbDy[k] != 0) ? std::sqrt(2.0) : 1.0;
        t.weights[i * 4 + k] = s.params.gamma / dist * std::exp(-beta * (c - s.image.color(nx, ny)).squaredNorm());
      }
    }
  }
  return t;
}

double energy_of(const RegionTerms& t, const Bitmask& labeling) {
  const auto& r = t.region;
  double e = 0.0;
  std::size_t i = 0;
  for (int y = r.ul_y; y < r.lr_y; ++y) {
    for (int x = r.ul_x; x < r.lr_x; ++x, ++i) {
      const bool fg = labeling(y, x) != 0;
      e += fg ? t.cost_fg[i] : t.cost_bg[i];
      for (int k = 0; k < 4; ++k) {
        const double wgt = t.weights[i * 4 + k];
        if (wgt == 0.0) continue;
        if (fg != (labeling(y + kNbDy[k], x + kNbDx[k]) != 0)) e += wgt;
      }
    }
  }
  return e;
}

Bitmask min_cut(const RegionTerms& t, int width, int height) {
  const auto& r = t.region;
  const int w = r.width();
  const int n = static_cast<int>(r.area());
  MaxFlowGraph graph(n, n * 4);
  for (int i = 0; i < n; ++i) {
    // Source side = foreground: cutting the sink link costs the foreground data term.
    const double m = std::min(t.cost_fg[i], t.cost_bg[i]);
    graph.add_terminal_weights(i, t.cost_bg[i] - m, t.cost_fg[i] - m);
    const int x = i % w, y = i / w;
    for (int k = 0; k < 4; ++k) {
      const double wgt = t.weights[static_cast<std::size_t>(i) * 4 + k];
      if (wgt == 0.0) continue;
      const int j = (y + kNbDy[k]) * w + (x + kNbDx[k]);
      graph.add_edge(i, j, wgt, wgt);
    }
  }
  graph.solve();

  Bitmask out = empty_mask(width, height);
  for (int i = 0; i < n; ++i) {
    if (graph.in_source_segment(i)) out(r.ul_y + i / w, r.ul_x + i % w) = 1;
  }
  return out;
}

void apply_labeling(GrabCutState& s, const Bitmask& labeling) {
  for (Eigen::Index i = 0; i < s.trimap.size(); ++i) {
    auto& l = s.trimap.data()[i];
    if (is_sure(l)) continue;
    l = labeling.data()[i] != 0 ? TrimapLabel::ProbableForeground : TrimapLabel::ProbableBackground;
  }
}

std::pair<ColorSamples, ColorSamples> split_samples(const GrabCutState& s, const BoundingBox& r) {
  long nf = 0, nb = 0;
  for (int y = r.ul_y; y < r.lr_y; ++y) {
    for (int x = r.ul_x; x < r.lr_x; ++x) (is_foreground(s.trimap(y, x)) ? nf : nb)++;
  }
  ColorSamples fg(nf, 3), bg(nb, 3);
  nf = nb = 0;
  for (int y = r.ul_y; y < r.lr_y; ++y) {
    for (int x = r.ul_x; x < r.lr_x; ++x) {
      const Eigen::Vector3d c = s.image.color(x, y);
      if (is_foreground(s.trimap(y, x))) {
        fg.row(nf++) = c.transpose();
      } else {
        bg.row(nb++) = c.transpose();
      }
    }
  }
  return {std::move(fg), std::move(bg)};
}

std::vector<int> assign_components(const GaussianMixture& model, const ColorSamples& samples) {
  std::vector<int> a(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    a[static_cast<std::size_t>(i)] = model.most_likely_component(samples.row(i).transpose());
  }
  return a;
}

void finish(GrabCutResult& res) {
  res.mask = res.state.labeling();
  if ((res.mask == 0).all()) {
    res.collapsed = true;
    res.warnings.emplace_back("SegmentationCollapsed: no foreground pixels remain");
  }
}

void run_iterations(GrabCutResult& res, int iterations) {
  auto& s = res.state;
  for (int it = 0; it < iterations; ++it) {
    const BoundingBox r = s.working_region();
    const auto [fg, bg] = split_samples(s, r);
    if (fg.rows() == 0 || bg.rows() == 0) break;  // labels are fully determined
    s.fg_model.fit(fg, assign_components(s.fg_model, fg), s.params.covariance_regularization);
    s.bg_model.fit(bg, assign_components(s.bg_model, bg), s.params.covariance_regularization);

    const RegionTerms terms = build_terms(s);
    const Bitmask before = s.labeling();
    const Bitmask after = min_cut(terms, s.image.width, s.image.height);
    res.energy_trace.push_back({energy_of(terms, before), energy_of(terms, after)});
    apply_labeling(s, after);
  }
}

}  // namespace

BoundingBox GrabCutState::working_region() const {
  const int h = static_cast<int>(trimap.rows());
  const int w = static_cast<int>(trimap.cols());
  int min_x = w, min_y = h, max_x = -1, max_y = -1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (trimap(y, x) == TrimapLabel::SureBackground) continue;
      min_x = std::min(min_x, x);
      min_y = std::min(min_y, y);
      max_x = std::max(max_x, x);
      max_y = std::max(max_y, y);
    }
  }
  if (max_x < 0) return {0, 0, 0, 0};
  const int pad = params.crop_padding;
  return intersect(BoundingBox{min_x - pad, min_y - pad, max_x + 1 + pad, max_y + 1 + pad}, BoundingBox{0, 0, w, h});
}

Bitmask GrabCutState::labeling() const {
  Bitmask out(trimap.rows(), trimap.cols());
  for (Eigen::Index i = 0; i < trimap.size(); ++i) out.data()[i] = is_foreground(trimap.data()[i]) ? 1 : 0;
  return out;
}

void grabcut_fit_models(GrabCutState& s) {
  const auto [fg, bg] = split_samples(s, s.working_region());
  if (fg.rows() > 0) s.fg_model.fit(fg, assign_components(s.fg_model, fg), s.params.covariance_regularization);
  if (bg.rows() > 0) s.bg_model.fit(bg, assign_components(s.bg_model, bg), s.params.covariance_regularization);
}

double grabcut_energy(const GrabCutState& state, const Bitmask& labeling) {
  return energy_of(build_terms(state), labeling);
}

Bitmask grabcut_min_cut(const GrabCutState& state) {
  return min_cut(build_terms(state), state.image.width, state.image.height);
}

GrabCutResult grabcut_init(const RgbImage& image, const BoundingBox& rect, int iterations, const GrabCutParams& params) {
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
  if (rect.empty() || rect.area() < 4) {
    throw Error(ErrorCode::DegenerateRect, "GrabCut rectangle must cover at least 4 pixels");
  }
  if (rect.ul_x < 0 || rect.ul_y < 0 || rect.lr_x > image.width || rect.lr_y > image.height ||
      (rect.ul_x == 0 && rect.ul_y == 0 && rect.lr_x == image.width && rect.lr_y == image.height)) {
    throw Error(ErrorCode::DegenerateRect, "GrabCut rectangle must lie inside the image and leave background");
  }

  GrabCutResult res;
  auto& s = res.state;
  s.image = image;
  s.params = params;
  s.trimap = Trimap::Constant(image.height, image.width, TrimapLabel::SureBackground);
  s.trimap.block(rect.ul_y, rect.ul_x, rect.height(), rect.width()).setConstant(TrimapLabel::ProbableForeground);
  s.fg_model = GaussianMixture(params.components);
  s.bg_model = GaussianMixture(params.components);

  const auto [fg, bg] = split_samples(s, s.working_region());
  s.fg_model.fit(fg, GaussianMixture::split_clusters(fg, params.components), params.covariance_regularization);
  s.bg_model.fit(bg, GaussianMixture::split_clusters(bg, params.components), params.covariance_regularization);

  run_iterations(res, iterations);
  finish(res);
  return res;
}

GrabCutResult grabcut_refine(GrabCutState state, const std::vector<Brush>& brushes, int iterations) {
  if (iterations < 1) throw Error(ErrorCode::InvalidArgument, "iterations must be positive");
  GrabCutResult res;
  res.state = std::move(state);
  auto& s = res.state;
  const int w = s.image.width, h = s.image.height;

  Bitmask tp = empty_mask(w, h), tn = empty_mask(w, h);
  for (const auto& b : brushes) {
    if (b.kind != BrushKind::TruePositive && b.kind != BrushKind::TrueNegative) {
      throw Error(ErrorCode::InvalidArgument, "grabcut_refine accepts only TruePositive/TrueNegative brushes");
    }
    const Bitmask foot = brush_footprint(b, w, h);
    const bool positive = b.kind == BrushKind::TruePositive;
    const auto label = positive ? TrimapLabel::SureForeground : TrimapLabel::SureBackground;
    s.trimap = (foot != 0).select(label, s.trimap);
    (positive ? tp : tn) = ((positive ? tp : tn) != 0 || foot != 0).cast<std::uint8_t>();
  }
  const auto conflicts = ((tp != 0) && (tn != 0)).count();
  if (conflicts > 0) {
    res.warnings.push_back("ConflictingBrush: " + std::to_string(conflicts) +
                           " pixels received both brushes; the later stroke wins");
  }

  run_iterations(res, iterations);
  finish(res);
  return res;
}

}  // namespace annotweave
