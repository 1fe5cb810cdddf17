#include "carskit/gp.hpp"

#include "carskit/metrics.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace carskit {

namespace {

Eigen::MatrixXd stack_rows(const std::vector<Spectrum>& rows) {
  const Index n = static_cast<Index>(rows.size());
  const Index l = rows.front().size();
  Eigen::MatrixXd out(n, l);
  for (Index i = 0; i < n; ++i) {
    if (rows[static_cast<size_t>(i)].size() != l) {
      throw DataError("gp: inconsistent spectrum lengths");
    }
    out.row(i) = rows[static_cast<size_t>(i)].matrix().transpose();
  }
  return out;
}

Eigen::MatrixXd rbf_kernel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           double lengthscale, double signal_var) {
  // Squared distances via the usual expansion, clamped at 0.
  Eigen::VectorXd a2 = a.rowwise().squaredNorm();
  Eigen::VectorXd b2 = b.rowwise().squaredNorm();
  Eigen::MatrixXd d2 = (-2.0 * a * b.transpose());
  d2.colwise() += a2;
  d2.rowwise() += b2.transpose();
  d2 = d2.cwiseMax(0.0);
  return signal_var * (-d2 / (2.0 * lengthscale * lengthscale)).array().exp();
}

}  // namespace

double median_heuristic_lengthscale(const std::vector<Spectrum>& inputs,
                                    Rng& rng) {
  const Index n = static_cast<Index>(inputs.size());
  std::vector<Index> idx(static_cast<size_t>(n));
  std::iota(idx.begin(), idx.end(), Index{0});
  const Index cap = 500;
  if (n > cap) {
    for (Index i = 0; i < cap; ++i) {
      const Index j = i + static_cast<Index>(rng.uniform_index(
                              static_cast<std::uint64_t>(n - i)));
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(cap));
  }
  std::vector<double> dists;
  dists.reserve(idx.size() * (idx.size() - 1) / 2);
  for (size_t i = 0; i < idx.size(); ++i) {
    for (size_t j = i + 1; j < idx.size(); ++j) {
      const double d = std::sqrt(
          (inputs[static_cast<size_t>(idx[i])] -
           inputs[static_cast<size_t>(idx[j])])
              .square()
              .sum());
      dists.push_back(d);
    }
  }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                   dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

GpModel gp_fit_fixed(const std::vector<Spectrum>& inputs,
                     const std::vector<Spectrum>& labels, double lengthscale,
                     double signal_var, double noise_var, double jitter) {
  if (inputs.empty() || inputs.size() != labels.size()) {
    throw DataError("gp_fit: empty or mismatched training set");
  }
  GpModel model;
  model.train_inputs = stack_rows(inputs);
  Eigen::MatrixXd y = stack_rows(labels);
  model.y_mean = y.colwise().mean().transpose().array();
  y.rowwise() -= model.y_mean.matrix().transpose();

  model.lengthscale = lengthscale;
  model.signal_var = signal_var;
  model.noise_var = noise_var;

  const Index m = model.train_inputs.rows();
  Eigen::MatrixXd k =
      rbf_kernel(model.train_inputs, model.train_inputs, lengthscale,
                 signal_var);
  // Jitter escalation on factorization failure.
  double eps = jitter;
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::MatrixXd k_noisy =
        k + (noise_var + eps) * Eigen::MatrixXd::Identity(m, m);
    Eigen::LLT<Eigen::MatrixXd> llt(k_noisy);
    if (llt.info() == Eigen::Success) {
      model.chol_lower = llt.matrixL();
      model.alpha = llt.solve(y);
      return model;
    }
    eps = std::max(eps * 10.0, 1e-12);
  }
  throw NumericError("gp_fit: kernel matrix not positive definite");
}

GpModel gp_fit(const std::vector<Spectrum>& inputs,
               const std::vector<Spectrum>& labels, const GpConfig& cfg,
               Rng& rng) {
  if (inputs.empty() || inputs.size() != labels.size()) {
    throw DataError("gp_fit: empty or mismatched training set");
  }
  // Subsample to the tractable cap, deterministically.
  std::vector<Spectrum> x(inputs.begin(), inputs.end());
  std::vector<Spectrum> y(labels.begin(), labels.end());
  const Index n = static_cast<Index>(x.size());
  if (n > cfg.max_train) {
    std::vector<Index> idx(static_cast<size_t>(n));
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index i = n - 1; i > 0; --i) {
      const Index j = static_cast<Index>(
          rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
      std::swap(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
    }
    idx.resize(static_cast<size_t>(cfg.max_train));
    std::sort(idx.begin(), idx.end());
    std::vector<Spectrum> xs, ys;
    for (Index i : idx) {
      xs.push_back(x[static_cast<size_t>(i)]);
      ys.push_back(y[static_cast<size_t>(i)]);
    }
    x.swap(xs);
    y.swap(ys);
  }

  const double lengthscale = median_heuristic_lengthscale(x, rng);
  // Signal variance from the label spread.
  double var_sum = 0.0;
  Eigen::MatrixXd ym = stack_rows(y);
  Eigen::RowVectorXd mean = ym.colwise().mean();
  var_sum = (ym.rowwise() - mean).array().square().mean();
  const double signal_var = std::max(var_sum, 1e-8);

  // Hold out a fraction for noise-variance selection.
  const Index total = static_cast<Index>(x.size());
  const Index n_holdout = std::max<Index>(
      1, static_cast<Index>(std::llround(cfg.holdout_fraction *
                                         static_cast<double>(total))));
  const Index n_fit = total - n_holdout;
  if (n_fit < 1) throw DataError("gp_fit: training set too small");
  std::vector<Spectrum> x_fit(x.begin(), x.begin() + n_fit);
  std::vector<Spectrum> y_fit(y.begin(), y.begin() + n_fit);
  std::vector<Spectrum> x_out(x.begin() + n_fit, x.end());
  std::vector<Spectrum> y_out(y.begin() + n_fit, y.end());

  double best_noise = cfg.noise_grid.front();
  double best_ll = -std::numeric_limits<double>::infinity();
  for (double noise : cfg.noise_grid) {
    const GpModel candidate =
        gp_fit_fixed(x_fit, y_fit, lengthscale, signal_var, noise, cfg.jitter);
    std::vector<PredictiveDistribution> preds;
    preds.reserve(x_out.size());
    for (const auto& xo : x_out) preds.push_back(gp_predict(candidate, xo));
    const double ll = avg_log_likelihood(preds, y_out);
    if (ll > best_ll) {
      best_ll = ll;
      best_noise = noise;
    }
  }
  return gp_fit_fixed(x, y, lengthscale, signal_var, best_noise, cfg.jitter);
}

PredictiveDistribution gp_predict(const GpModel& model, const Spectrum& x) {
  if (x.size() != model.train_inputs.cols()) {
    throw DataError("gp_predict: input length mismatch");
  }
  const Eigen::MatrixXd xq = x.matrix().transpose();
  const Eigen::MatrixXd kstar = rbf_kernel(
      model.train_inputs, xq, model.lengthscale, model.signal_var);  // m x 1

  PredictiveDistribution out;
  const Eigen::VectorXd mean_vec = model.alpha.transpose() * kstar.col(0);
  out.mean = mean_vec.array() + model.y_mean;

  // Shared posterior variance across channels; includes observation noise.
  const Eigen::VectorXd v =
      model.chol_lower.triangularView<Eigen::Lower>().solve(kstar.col(0));
  const double reduction = v.squaredNorm();
  const double var =
      std::max(model.signal_var - reduction + model.noise_var, 0.0);
  out.variance = Array::Constant(x.size(), std::max(var, kVarianceFloor));
  return out;
}

}  // namespace carskit
