#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "qpoisson/simulator.hpp"

namespace qpoisson {

struct QubitReadout {
  double p01 = 0.0;  // Pr(read 1 | true 0)
  double p10 = 0.0;  // Pr(read 0 | true 1)
};

/// Independent per-qubit readout flips. Qubit k is the k-th bit from the
/// right of a histogram key.
class ReadoutModel {
 public:
  ReadoutModel() = default;
  explicit ReadoutModel(std::vector<QubitReadout> qubits);

  static ReadoutModel uniform(int width, double p01, double p10);
  /// {"0": {"p01": .., "p10": ..}, "1": {...}, ...}
  static ReadoutModel from_json(const std::string& text);
  static ReadoutModel from_file(const std::string& path);

  int width() const { return static_cast<int>(qubits_.size()); }
  const QubitReadout& qubit(int k) const { return qubits_[static_cast<std::size_t>(k)]; }
  /// 2x2 column-stochastic confusion matrix; column = true bit, row = read bit.
  Eigen::Matrix2d confusion(int k) const;

 private:
  std::vector<QubitReadout> qubits_;
};

/// Flips every recorded bit independently per the model.
Histogram corrupt(const Histogram& histogram, const ReadoutModel& model, std::uint64_t seed);

inline constexpr int kMaxCalibrationWidth = 10;

/// Kronecker product of the per-qubit confusion matrices (qubit width-1 leftmost).
Eigen::MatrixXd calibration_matrix(const ReadoutModel& model, int width);

/// Histogram counts as a probability vector indexed by outcome integer.
Eigen::VectorXd histogram_distribution(const Histogram& histogram, int width);

/// Constrained least squares: argmin |C x - y| over the probability simplex.
Eigen::VectorXd mitigate(const Histogram& noisy, const Eigen::MatrixXd& calibration);
Eigen::VectorXd mitigate(const Eigen::VectorXd& frequencies, const Eigen::MatrixXd& calibration);

/// Euclidean projection onto {x >= 0, sum x = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

/// accuracy^cnot_count.
double fidelity_estimate(std::uint64_t cnot_count, double gate_accuracy);

/// Fidelity below which a hardware run is indistinguishable from noise.
inline constexpr double kWashedOutFidelity = 1e-2;
inline bool washed_out(double fidelity) { return fidelity < kWashedOutFidelity; }

}  // namespace qpoisson
