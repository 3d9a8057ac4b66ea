#pragma once

#include <string>
#include <vector>

#include "qmc/linalg.hpp"
#include "qmc/registers.hpp"

namespace qmc {

class StateVector {
 public:
  StateVector() = default;
  StateVector(Vec amps, RegList regs, bool validate = true);

  const Vec& amps() const { return amps_; }
  const RegList& regs() const { return regs_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }

  // Amplitudes as a (dim of `rows`) x (dim of the rest) matrix; `rows`
  // registers come first in the listed order, the rest in original order.
  Mat as_matrix(const std::vector<std::string>& rows) const;

 private:
  Vec amps_;
  RegList regs_;
};

class DensityOperator {
 public:
  DensityOperator() = default;
  DensityOperator(Mat m, RegList regs, bool validate = true);

  static DensityOperator from_pure(const StateVector& psi);
  static DensityOperator maximally_mixed(const RegList& regs);

  const Mat& matrix() const { return m_; }
  const RegList& regs() const { return regs_; }
  std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }

  void validate() const;

 private:
  Mat m_;
  RegList regs_;
};

// Register algebra. Register names are always resolved against the input.
DensityOperator tensor(const DensityOperator& a, const DensityOperator& b);
StateVector tensor(const StateVector& a, const StateVector& b);
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& over);
DensityOperator partial_trace(const StateVector& psi, const std::vector<std::string>& over);
DensityOperator marginal(const DensityOperator& rho, const std::vector<std::string>& keep);
DensityOperator permute(const DensityOperator& rho, const std::vector<std::string>& order);
StateVector permute(const StateVector& psi, const std::vector<std::string>& order);

// Raw-matrix versions used by the sparse code paths.
Mat partial_trace_matrix(const Mat& m, const RegList& regs, const std::vector<int>& keep);
Mat permute_matrix(const Mat& m, const RegList& regs, const std::vector<int>& perm);

StateVector purify(const DensityOperator& rho, const std::string& purifier);

// V maps the product of `source` registers onto `target` registers. The
// result lists the untouched registers first, then `target`.
StateVector apply_isometry(const Mat& v, const StateVector& psi, const std::vector<std::string>& source,
                           const RegList& target);
DensityOperator apply_isometry(const Mat& v, const DensityOperator& rho,
                               const std::vector<std::string>& source, const RegList& target);

template <class S>
struct Outcome {
  int value;
  double probability;
  S post;
};

// Computational-basis measurement; the measured register stays in place.
std::vector<Outcome<StateVector>> measure_register(const StateVector& psi, const std::string& reg);

enum class Metric { fidelity, trace, purified };

double fidelity(const Mat& rho, const Mat& sigma);
double trace_distance(const Mat& rho, const Mat& sigma);
double purified_from_fidelity(double f);

double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double distance(Metric metric, const DensityOperator& rho, const DensityOperator& sigma);

// Brings a state into lexicographic register order.
DensityOperator canonical(const DensityOperator& rho);

}  // namespace qmc
