#include "qpoisson/noise.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace qpoisson {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

ReadoutModel::ReadoutModel(std::vector<QubitReadout> qubits) : qubits_(std::move(qubits)) {
  for (std::size_t k = 0; k < qubits_.size(); ++k) {
    const auto& q = qubits_[k];
    if (!(q.p01 >= 0.0 && q.p01 < 0.5 && q.p10 >= 0.0 && q.p10 < 0.5)) {
      throw DomainError("ReadoutModel: qubit " + std::to_string(k) +
                        " flip probabilities must lie in [0, 0.5)");
    }
  }
}

ReadoutModel ReadoutModel::uniform(int width, double p01, double p10) {
  return ReadoutModel(std::vector<QubitReadout>(static_cast<std::size_t>(width), {p01, p10}));
}

ReadoutModel ReadoutModel::from_json(const std::string& text) {
  try {
    const auto doc = nlohmann::json::parse(text);
    if (!doc.is_object()) throw DomainError("readout model JSON: expected an object");
    std::vector<QubitReadout> qubits(doc.size());
    for (const auto& [key, entry] : doc.items()) {
      const auto k = static_cast<std::size_t>(std::stoul(key));
      if (k >= qubits.size()) {
        throw DomainError("readout model JSON: qubit keys must be 0..width-1");
      }
      qubits[k] = QubitReadout{entry.at("p01").get<double>(), entry.at("p10").get<double>()};
    }
    return ReadoutModel(std::move(qubits));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("readout model JSON: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw DomainError("readout model JSON: qubit keys must be integers");
  }
}

ReadoutModel ReadoutModel::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open readout model: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

Eigen::Matrix2d ReadoutModel::confusion(int k) const {
  const auto& q = qubit(k);
  Eigen::Matrix2d c;
  c << 1.0 - q.p01, q.p10, q.p01, 1.0 - q.p10;
  return c;
}

Histogram corrupt(const Histogram& histogram, const ReadoutModel& model, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Histogram out;
  const auto width = static_cast<std::size_t>(model.width());
  for (const auto& [key, count] : histogram) {
    if (key.size() != width) {
      throw DomainError("corrupt: key '" + key + "' does not match model width " +
                        std::to_string(width));
    }
    for (std::uint64_t r = 0; r < count; ++r) {
      std::string read = key;
      for (std::size_t k = 0; k < width; ++k) {
        char& bit = read[width - 1 - k];
        const auto& q = model.qubit(static_cast<int>(k));
        const double flip = bit == '1' ? q.p10 : q.p01;
        if (uniform01(rng) < flip) bit = bit == '1' ? '0' : '1';
      }
      ++out[read];
    }
  }
  return out;
}

Eigen::MatrixXd calibration_matrix(const ReadoutModel& model, int width) {
  if (width > kMaxCalibrationWidth) {
    throw ResourceError("calibration_matrix: width " + std::to_string(width) + " exceeds " +
                        std::to_string(kMaxCalibrationWidth));
  }
  if (width != model.width()) throw DomainError("calibration_matrix: width does not match model");
  Eigen::MatrixXd result = Eigen::MatrixXd::Ones(1, 1);
  for (int k = width - 1; k >= 0; --k) {
    const Eigen::Matrix2d c = model.confusion(k);
    Eigen::MatrixXd next(result.rows() * 2, result.cols() * 2);
    for (Eigen::Index r = 0; r < result.rows(); ++r) {
      for (Eigen::Index s = 0; s < result.cols(); ++s) {
        next.block<2, 2>(2 * r, 2 * s) = result(r, s) * c;
      }
    }
    result = std::move(next);
  }
  return result;
}

Eigen::VectorXd histogram_distribution(const Histogram& histogram, int width) {
  Eigen::VectorXd p = Eigen::VectorXd::Zero(Eigen::Index{1} << width);
  double total = 0.0;
  for (const auto& [key, count] : histogram) {
    if (static_cast<int>(key.size()) != width) {
      throw DomainError("histogram key '" + key + "' does not have width " + std::to_string(width));
    }
    p[static_cast<Eigen::Index>(std::stoull(key, nullptr, 2))] += static_cast<double>(count);
    total += static_cast<double>(count);
  }
  if (total > 0.0) p /= total;
  return p;
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).cwiseMax(0.0).matrix();
}

Eigen::VectorXd mitigate(const Eigen::VectorXd& frequencies, const Eigen::MatrixXd& calibration) {
  if (calibration.rows() != frequencies.size() || calibration.cols() != frequencies.size()) {
    throw DomainError("mitigate: calibration size does not match the distribution");
  }
  // Accelerated projected gradient on 0.5 |C x - y|^2.
  const Eigen::MatrixXd gram = calibration.transpose() * calibration;
  const Eigen::VectorXd cty = calibration.transpose() * frequencies;
  const double lipschitz =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(gram, Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  const double step = 1.0 / lipschitz;
  Eigen::VectorXd x = project_to_simplex(calibration.partialPivLu().solve(frequencies));
  Eigen::VectorXd y = x;
  double t = 1.0;
  for (int iter = 0; iter < 20000; ++iter) {
    const Eigen::VectorXd next = project_to_simplex(y - step * (gram * y - cty));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / t_next) * (next - x);
    const double change = (next - x).lpNorm<Eigen::Infinity>();
    x = next;
    t = t_next;
    if (change < 1e-14) break;
  }
  return x / x.sum();
}

Eigen::VectorXd mitigate(const Histogram& noisy, const Eigen::MatrixXd& calibration) {
  const int width = static_cast<int>(std::log2(static_cast<double>(calibration.rows())) + 0.5);
  return mitigate(histogram_distribution(noisy, width), calibration);
}

double fidelity_estimate(std::uint64_t cnot_count, double gate_accuracy) {
  if (!(gate_accuracy > 0.0 && gate_accuracy <= 1.0)) {
    throw DomainError("fidelity_estimate: accuracy must lie in (0, 1]");
  }
  return std::pow(gate_accuracy, static_cast<double>(cnot_count));
}

}  // namespace qpoisson
