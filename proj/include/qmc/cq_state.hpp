#pragma once

#include <map>
#include <string>
#include <vector>

#include "qmc/state.hpp"

namespace qmc {

using Key = std::vector<int>;

struct CqBlock {
  double weight = 0.0;
  Mat rho;  // normalized block on the quantum registers
};

// Sparse classical-quantum state: sum_k w_k |k><k| (x) rho_k.
class CqState {
 public:
  CqState() = default;
  CqState(RegList classical_regs, RegList quantum_regs);

  const RegList& classical_regs() const { return cregs_; }
  const RegList& quantum_regs() const { return qregs_; }
  const std::map<Key, CqBlock>& blocks() const { return blocks_; }
  std::size_t quantum_dim() const { return total_dim(qregs_); }

  // Adds w * rho at key; an existing entry is merged as a mixture.
  void add(const Key& key, double weight, const Mat& rho);
  // Adds an unnormalized PSD operator (weight = its trace).
  void add_unnormalized(const Key& key, const Mat& op);

  double total_weight() const;
  void validate(double tol = 1e-10) const;

  // Marginal distribution of the classical part.
  std::map<Key, double> distribution() const;

 private:
  RegList cregs_;
  RegList qregs_;
  std::map<Key, CqBlock> blocks_;
};

// Register algebra in sparse form.
CqState cq_partial_trace(const CqState& s, const std::vector<std::string>& over);
CqState cq_permute(const CqState& s, const std::vector<std::string>& classical_order,
                   const std::vector<std::string>& quantum_order);
CqState cq_tensor(const CqState& a, const CqState& b);

// Dense debug path (classical registers first); refuses above 2^14.
inline constexpr std::size_t kDenseCap = std::size_t{1} << 14;
DensityOperator densify(const CqState& s);

double cq_fidelity(const CqState& rho, const CqState& sigma);
double cq_trace_distance(const CqState& rho, const CqState& sigma);

std::vector<Outcome<CqState>> measure_register(const CqState& s, const std::string& reg);

}  // namespace qmc
