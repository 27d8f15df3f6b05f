#include "qpoisson/model.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qpoisson {

PoissonSystem::PoissonSystem(int n, Eigen::VectorXd b, int d) : n_(n), d_(d), b_(std::move(b)) {
  if (n_ < 1 || n_ > 30) {
    throw DomainError("PoissonSystem: grid exponent n must be in [1, 30], got " +
                      std::to_string(n_));
  }
  if (d_ < 1) {
    throw DomainError("PoissonSystem: dimension count d must be >= 1, got " + std::to_string(d_));
  }
  if (b_.size() != unknowns()) {
    throw DomainError("PoissonSystem: b has " + std::to_string(b_.size()) +
                      " entries, expected (2^n - 1)^d = " + std::to_string(unknowns()));
  }
  if (!b_.allFinite()) {
    throw DomainError("PoissonSystem: b contains non-finite values");
  }
  if (b_.cwiseAbs().maxCoeff() == 0.0) {
    throw DomainError("PoissonSystem: b must have at least one nonzero entry");
  }
}

Eigen::Index PoissonSystem::unknowns() const {
  Eigen::Index total = 1;
  for (int k = 0; k < d_; ++k) total *= dim();
  return total;
}

EigenData eigenpairs(const PoissonSystem& system) {
  if (system.d() != 1) {
    throw DomainError("eigenpairs: closed form is per dimension; d = " +
                      std::to_string(system.d()) + " is not supported");
  }
  EigenData out;
  out.lambdas = closed_form_eigenvalues<double>(system.n());
  out.eigvecs = closed_form_eigenvectors<double>(system.n());
  out.betas = out.eigvecs.transpose() * system.normalized_b();
  out.kappa = out.lambdas.maxCoeff() / out.lambdas.minCoeff();
  return out;
}

Eigen::VectorXd exact_solve(const PoissonSystem& system) {
  if (system.d() == 1) {
    const double inv_h2 = std::ldexp(1.0, 2 * system.n());
    return tridiagonal_solve(2.0 * inv_h2, -inv_h2, system.b()).normalized();
  }
  const Eigen::MatrixXd a = build_matrix<double>(system);
  return a.llt().solve(system.b()).normalized();
}

PoissonSystem load_problem_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("problem JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("b")) {
    throw DomainError("problem JSON: expected an object with \"n\" and \"b\"");
  }
  try {
    const int n = doc.at("n").get<int>();
    const int d = doc.value("d", 1);
    const auto values = doc.at("b").get<std::vector<double>>();
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                         static_cast<Eigen::Index>(values.size()));
    return PoissonSystem(n, std::move(b), d);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("problem JSON: ") + e.what());
  }
}

PoissonSystem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_problem_json(buf.str());
}

}  // namespace qpoisson
