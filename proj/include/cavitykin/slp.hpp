#pragma once

#include <cstdint>
#include <vector>

#include "cavitykin/errors.hpp"

namespace cavitykin {

double tansig(double z);
double tansig_derivative(double z);

// Linear min-max rescaling of a scalar range onto another.
struct MinMaxTransform {
  double in_min = -1.0;
  double in_max = 1.0;
  double out_min = -1.0;
  double out_max = 1.0;

  double apply(double x) const {
    return (x - in_min) / (in_max - in_min) * (out_max - out_min) + out_min;
  }
  double inverse(double y) const {
    return (y - out_min) / (out_max - out_min) * (in_max - in_min) + in_min;
  }
  double slope() const { return (out_max - out_min) / (in_max - in_min); }
  bool valid() const { return in_max > in_min && out_max > out_min; }
};

// Four-parameter scalar regressor: distance-to-laser-center -> depth-of-cut.
// input_transform maps the trained input range onto [-1, 1]; output_transform
// maps the network output in [-1, 1] back onto the label range. Outputs are
// clamped to be non-negative and flat beyond clamp_max_s (the trained input
// maximum).
struct SlpModel {
  double w1 = 1.0;
  double b1 = 0.0;
  double w2 = 1.0;
  double b2 = 0.0;
  MinMaxTransform input_transform{};   // physical s -> [-1, 1]
  MinMaxTransform output_transform{};  // [-1, 1] -> physical depth
  double clamp_max_s = 1.0;
};

double slp_forward(const SlpModel& model, double s);

// Slope of slp_forward. Zero outside the open support interval and wherever
// the non-negativity clamp makes the output flat.
double slp_input_derivative(const SlpModel& model, double s);

struct CavitySample {
  double s = 0.0;  // distance-to-laser-center, mm
  double d = 0.0;  // depth-of-cut, mm
  int cavity_id = 0;
  int point_index = 0;
};

enum class Split : std::uint8_t { train, val, test };

struct RegressionDataset {
  std::vector<CavitySample> samples;
  std::vector<Split> split;  // aligned with samples

  std::vector<std::size_t> indices_of(Split which) const;
};

// Split policy: even cavity ids are held out as the test set; the remaining
// samples are shuffled with the seed and split 8:2 into train:validation.
void assign_splits(RegressionDataset& data, std::uint64_t seed);

struct FitConfig {
  std::uint64_t seed = 0;
  int restarts = 8;
  int max_iterations = 500;
  double lambda0 = 1e-3;
  double tol_mse_change = 1e-12;
  double tol_step = 1e-10;
};

struct FitReport {
  double rmse = 0.0;  // test split, mm
  double mae = 0.0;   // test split, mm
  int epochs_used = 0;
  double train_mse = 0.0;
  double val_mse = 0.0;
  double test_mse = 0.0;
  bool converged = false;
};

struct FitResult {
  SlpModel model;
  FitReport report;
};

// Levenberg-Marquardt fit of the four parameters against the training split,
// with the validation split selecting the best iterate and the test split
// reported in the FitReport. Deterministic for a fixed (data, config.seed).
FitResult fit_slp(const RegressionDataset& data, const FitConfig& config = {});

}  // namespace cavitykin
