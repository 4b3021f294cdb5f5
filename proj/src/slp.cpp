#include "cavitykin/slp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "cavitykin/random.hpp"

namespace cavitykin {

double tansig(double z) {
  // (e^z - e^-z) / (e^z + e^-z), evaluated in the overflow-free form.
  return std::tanh(z);
}

double tansig_derivative(double z) {
  const double t = std::tanh(z);
  return 1.0 - t * t;
}

namespace {

// Network output before the non-negativity clamp.
double forward_raw(const SlpModel& m, double s) {
  const double z = m.w1 * m.input_transform.apply(s) + m.b1;
  return m.output_transform.apply(tansig(z) * m.w2 + m.b2);
}

}  // namespace

double slp_forward(const SlpModel& model, double s) {
  const double sc = std::clamp(s, 0.0, model.clamp_max_s);
  return std::max(forward_raw(model, sc), 0.0);
}

double slp_input_derivative(const SlpModel& model, double s) {
  if (s <= 0.0 || s >= model.clamp_max_s) return 0.0;
  if (forward_raw(model, s) <= 0.0) return 0.0;  // clamped flat
  const double z = model.w1 * model.input_transform.apply(s) + model.b1;
  return model.w1 * model.w2 * model.output_transform.slope() *
         model.input_transform.slope() * tansig_derivative(z);
}

std::vector<std::size_t> RegressionDataset::indices_of(Split which) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split.size(); ++i)
    if (split[i] == which) out.push_back(i);
  return out;
}

void assign_splits(RegressionDataset& data, std::uint64_t seed) {
  const std::size_t n = data.samples.size();
  data.split.assign(n, Split::train);

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < n; ++i) {
    if (data.samples[i].cavity_id % 2 == 0)
      data.split[i] = Split::test;
    else
      pool.push_back(i);
  }

  // Seeded Fisher-Yates so the 8:2 train:validation cut is reproducible.
  std::mt19937_64 gen(mix_seed(seed, 0x5ead5, pool.size()));
  for (std::size_t i = pool.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(gen() % i);
    std::swap(pool[i - 1], pool[j]);
  }
  const std::size_t n_val = pool.size() / 5;
  for (std::size_t i = 0; i < n_val; ++i) data.split[pool[i]] = Split::val;
}

namespace {

struct Params {
  double w1, b1, w2, b2;
};

double raw_mse(const Params& p, const MinMaxTransform& tx, const MinMaxTransform& ty,
               const std::vector<double>& s, const std::vector<double>& d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double y = ty.apply(std::tanh(p.w1 * tx.apply(s[i]) + p.b1) * p.w2 + p.b2);
    const double r = y - d[i];
    acc += r * r;
  }
  return acc / static_cast<double>(s.size());
}

double split_mse(const SlpModel& m, const RegressionDataset& data,
                 const std::vector<std::size_t>& idx) {
  if (idx.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i : idx) {
    const double r = slp_forward(m, data.samples[i].s) - data.samples[i].d;
    acc += r * r;
  }
  return acc / static_cast<double>(idx.size());
}

struct LmOutcome {
  Params best_val_params{};
  double best_val_mse = std::numeric_limits<double>::infinity();
  int epochs = 0;
  bool converged = false;
};

// Damped Gauss-Newton on the four parameters. Every accepted iterate is a
// candidate "epoch"; the one with the lowest validation error wins.
LmOutcome levenberg_marquardt(Params p, const MinMaxTransform& tx, const MinMaxTransform& ty,
                              const std::vector<double>& s_tr, const std::vector<double>& d_tr,
                              const std::vector<double>& s_val, const std::vector<double>& d_val,
                              const FitConfig& cfg) {
  using Vec4 = Eigen::Vector4d;
  using Mat4 = Eigen::Matrix4d;

  const auto val_mse = [&](const Params& q) {
    return s_val.empty() ? raw_mse(q, tx, ty, s_tr, d_tr) : raw_mse(q, tx, ty, s_val, d_val);
  };

  LmOutcome out;
  out.best_val_params = p;
  out.best_val_mse = val_mse(p);

  const double ty_slope = ty.slope();
  const std::size_t n = s_tr.size();

  double mse = raw_mse(p, tx, ty, s_tr, d_tr);
  double lambda = cfg.lambda0;

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    Mat4 jtj = Mat4::Zero();
    Vec4 jtr = Vec4::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double x = tx.apply(s_tr[i]);
      const double z = p.w1 * x + p.b1;
      const double t = std::tanh(z);
      const double y = ty.apply(t * p.w2 + p.b2);
      const double r = y - d_tr[i];
      const double dtdz = 1.0 - t * t;
      Vec4 j;
      j << ty_slope * p.w2 * dtdz * x,  // dw1
          ty_slope * p.w2 * dtdz,       // db1
          ty_slope * t,                 // dw2
          ty_slope;                     // db2
      jtj.noalias() += j * j.transpose();
      jtr.noalias() += j * r;
    }

    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Mat4 damped = jtj + lambda * Mat4::Identity();
      const Vec4 step = damped.ldlt().solve(-jtr);
      const Params cand{p.w1 + step(0), p.b1 + step(1), p.w2 + step(2), p.b2 + step(3)};
      const double cand_mse = raw_mse(cand, tx, ty, s_tr, d_tr);
      if (cand_mse < mse) {
        const double dmse = mse - cand_mse;
        p = cand;
        mse = cand_mse;
        lambda = std::max(lambda * 0.1, 1e-14);
        accepted = true;
        ++out.epochs;

        const double v = val_mse(p);
        if (v < out.best_val_mse) {
          out.best_val_mse = v;
          out.best_val_params = p;
        }
        if (dmse < cfg.tol_mse_change || step.norm() < cfg.tol_step) {
          out.converged = true;
          return out;
        }
      } else {
        lambda = std::min(lambda * 10.0, 1e14);
      }
    }
    if (!accepted) {
      // No descent direction left at any damping; treat as converged.
      out.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace

FitResult fit_slp(const RegressionDataset& data, const FitConfig& config) {
  const auto train_idx = data.samples.size() == data.split.size()
                             ? data.indices_of(Split::train)
                             : throw DegenerateData("dataset split labels are missing");
  const auto val_idx = data.indices_of(Split::val);
  const auto test_idx = data.indices_of(Split::test);

  if (train_idx.size() < 10) throw DegenerateData("need at least 10 training samples");

  std::vector<double> s_tr, d_tr, s_val, d_val;
  for (std::size_t i : train_idx) {
    s_tr.push_back(data.samples[i].s);
    d_tr.push_back(data.samples[i].d);
  }
  for (std::size_t i : val_idx) {
    s_val.push_back(data.samples[i].s);
    d_val.push_back(data.samples[i].d);
  }

  const auto [s_min_it, s_max_it] = std::minmax_element(s_tr.begin(), s_tr.end());
  const auto [d_min_it, d_max_it] = std::minmax_element(d_tr.begin(), d_tr.end());
  double s_min = *s_min_it, s_max = *s_max_it;
  double d_min = *d_min_it, d_max = *d_max_it;

  if (!(s_max - s_min > 1e-12)) throw DegenerateData("all training inputs are equal");
  if (!(d_max - d_min > 1e-12)) {
    // Flat labels: widen the output range so the transform stays invertible;
    // the fit then reduces to matching a constant.
    d_min -= 0.5;
    d_max += 0.5;
  }

  const MinMaxTransform tx{s_min, s_max, -1.0, 1.0};
  const MinMaxTransform ty{-1.0, 1.0, d_min, d_max};

  std::mt19937_64 gen(mix_seed(config.seed, 0xf17, train_idx.size()));
  LmOutcome best;
  bool have_best = false;
  for (int r = 0; r < std::max(config.restarts, 1); ++r) {
    Params init{uniform_in(gen, -1.0, 1.0), uniform_in(gen, -1.0, 1.0),
                uniform_in(gen, -1.0, 1.0), uniform_in(gen, -1.0, 1.0)};
    LmOutcome run =
        levenberg_marquardt(init, tx, ty, s_tr, d_tr, s_val, d_val, config);
    if (!have_best || run.best_val_mse < best.best_val_mse) {
      best = run;
      have_best = true;
    }
  }

  SlpModel model;
  model.w1 = best.best_val_params.w1;
  model.b1 = best.best_val_params.b1;
  model.w2 = best.best_val_params.w2;
  model.b2 = best.best_val_params.b2;
  model.input_transform = tx;
  model.output_transform = ty;
  model.clamp_max_s = tx.in_max;

  FitReport report;
  report.epochs_used = best.epochs;
  report.converged = best.converged;
  report.train_mse = split_mse(model, data, train_idx);
  report.val_mse = split_mse(model, data, val_idx);
  report.test_mse = split_mse(model, data, test_idx);

  const auto& eval_idx = !test_idx.empty() ? test_idx : (!val_idx.empty() ? val_idx : train_idx);
  double sq = 0.0, ab = 0.0;
  for (std::size_t i : eval_idx) {
    const double r = slp_forward(model, data.samples[i].s) - data.samples[i].d;
    sq += r * r;
    ab += std::abs(r);
  }
  report.rmse = std::sqrt(sq / static_cast<double>(eval_idx.size()));
  report.mae = ab / static_cast<double>(eval_idx.size());

  return FitResult{model, report};
}

}  // namespace cavitykin
