#include "qmc/cq_state.hpp"

#include <algorithm>
#include <cmath>

namespace qmc {

CqState::CqState(RegList classical_regs, RegList quantum_regs)
    : cregs_(std::move(classical_regs)), qregs_(std::move(quantum_regs)) {
  check_registers(concat(cregs_, qregs_));
  for (auto& r : cregs_) r.kind = Kind::classical;
  for (auto& r : qregs_) r.kind = Kind::quantum;
}

void CqState::add(const Key& key, double weight, const Mat& rho) {
  if (key.size() != cregs_.size()) throw ValidationError("cq key length does not match classical registers");
  for (std::size_t i = 0; i < key.size(); ++i)
    if (key[i] < 0 || key[i] >= cregs_[i].dim)
      throw ValidationError("cq key value out of range for register '" + cregs_[i].name + "'");
  if (static_cast<std::size_t>(rho.rows()) != quantum_dim()) throw ValidationError("cq block dimension mismatch");
  if (weight <= 0.0) return;
  auto it = blocks_.find(key);
  if (it == blocks_.end()) {
    blocks_.emplace(key, CqBlock{weight, rho});
    return;
  }
  const double w = it->second.weight + weight;
  it->second.rho = (it->second.weight * it->second.rho + weight * rho) / w;
  it->second.weight = w;
}

void CqState::add_unnormalized(const Key& key, const Mat& op) {
  const double w = op.trace().real();
  if (w <= 0.0) return;
  add(key, w, op / w);
}

double CqState::total_weight() const {
  double s = 0.0;
  for (const auto& [k, b] : blocks_) s += b.weight;
  return s;
}

void CqState::validate(double tol) const {
  if (std::abs(total_weight() - 1.0) > tol) throw ValidationError("cq weights do not sum to 1");
  for (const auto& [k, b] : blocks_) {
    if (b.weight < 0.0) throw ValidationError("negative cq weight");
    DensityOperator(b.rho, qregs_, true);
  }
}

std::map<Key, double> CqState::distribution() const {
  std::map<Key, double> out;
  for (const auto& [k, b] : blocks_) out[k] += b.weight;
  return out;
}

namespace {

RegList pick(const RegList& regs, const std::vector<int>& pos) {
  RegList out;
  for (int p : pos) out.push_back(regs[p]);
  return out;
}

}  // namespace

CqState cq_partial_trace(const CqState& s, const std::vector<std::string>& over) {
  std::vector<std::string> c_over, q_over;
  for (const auto& nm : over) {
    if (find_register(s.classical_regs(), nm) >= 0) c_over.push_back(nm);
    else if (find_register(s.quantum_regs(), nm) >= 0) q_over.push_back(nm);
    else throw ValidationError("unknown register '" + nm + "'");
  }
  auto ckeep = complement(s.classical_regs().size(), positions_of(s.classical_regs(), c_over));
  auto qkeep = complement(s.quantum_regs().size(), positions_of(s.quantum_regs(), q_over));
  CqState out(pick(s.classical_regs(), ckeep), pick(s.quantum_regs(), qkeep));
  for (const auto& [k, b] : s.blocks()) {
    Key nk;
    for (int p : ckeep) nk.push_back(k[p]);
    Mat r = q_over.empty() ? b.rho : partial_trace_matrix(b.rho, s.quantum_regs(), qkeep);
    out.add(nk, b.weight, r);
  }
  return out;
}

CqState cq_permute(const CqState& s, const std::vector<std::string>& classical_order,
                   const std::vector<std::string>& quantum_order) {
  auto cp = positions_of(s.classical_regs(), classical_order);
  auto qp = positions_of(s.quantum_regs(), quantum_order);
  if (cp.size() != s.classical_regs().size() || qp.size() != s.quantum_regs().size())
    throw ValidationError("cq permutation must list every register");
  CqState out(pick(s.classical_regs(), cp), pick(s.quantum_regs(), qp));
  for (const auto& [k, b] : s.blocks()) {
    Key nk;
    for (int p : cp) nk.push_back(k[p]);
    out.add(nk, b.weight, permute_matrix(b.rho, s.quantum_regs(), qp));
  }
  return out;
}

CqState cq_tensor(const CqState& a, const CqState& b) {
  CqState out(concat(a.classical_regs(), b.classical_regs()), concat(a.quantum_regs(), b.quantum_regs()));
  for (const auto& [ka, ba] : a.blocks())
    for (const auto& [kb, bb] : b.blocks()) {
      Key k = ka;
      k.insert(k.end(), kb.begin(), kb.end());
      out.add(k, ba.weight * bb.weight, kron(ba.rho, bb.rho));
    }
  return out;
}

DensityOperator densify(const CqState& s) {
  RegList regs = concat(s.classical_regs(), s.quantum_regs());
  const std::size_t d = total_dim(regs);
  if (d > kDenseCap) throw BudgetExceeded("dense conversion refused: dimension " + std::to_string(d) + " > 2^14");
  const std::size_t dq = s.quantum_dim();
  Mat m = Mat::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (const auto& [k, b] : s.blocks()) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < k.size(); ++i) idx = idx * static_cast<std::size_t>(s.classical_regs()[i].dim) + k[i];
    const auto off = static_cast<Eigen::Index>(idx * dq);
    const auto n = static_cast<Eigen::Index>(dq);
    m.block(off, off, n, n) += b.weight * b.rho;
  }
  return DensityOperator(m, regs, false);
}

namespace {

CqState canonical_cq(const CqState& s) {
  return cq_permute(s, names_of(sorted_by_name(s.classical_regs())), names_of(sorted_by_name(s.quantum_regs())));
}

void check_compatible(const CqState& a, const CqState& b) {
  if (!same_register_set(a.classical_regs(), b.classical_regs()) ||
      !same_register_set(a.quantum_regs(), b.quantum_regs()))
    throw ValidationError("cq states have different register structure");
}

}  // namespace

double cq_fidelity(const CqState& rho, const CqState& sigma) {
  check_compatible(rho, sigma);
  const CqState a = canonical_cq(rho);
  const CqState b = canonical_cq(sigma);
  double f = 0.0;
  for (const auto& [k, ba] : a.blocks()) {
    auto it = b.blocks().find(k);
    if (it == b.blocks().end()) continue;
    f += std::sqrt(ba.weight * it->second.weight) * fidelity(ba.rho, it->second.rho);
  }
  return std::min(1.0, f);
}

double cq_trace_distance(const CqState& rho, const CqState& sigma) {
  check_compatible(rho, sigma);
  const CqState a = canonical_cq(rho);
  const CqState b = canonical_cq(sigma);
  const auto dq = static_cast<Eigen::Index>(a.quantum_dim());
  double t = 0.0;
  for (const auto& [k, ba] : a.blocks()) {
    auto it = b.blocks().find(k);
    Mat other = it == b.blocks().end() ? Mat::Zero(dq, dq) : Mat(it->second.weight * it->second.rho);
    t += trace_distance(ba.weight * ba.rho, other);
  }
  for (const auto& [k, bb] : b.blocks())
    if (!a.blocks().count(k)) t += 0.5 * bb.weight;
  return t;
}

std::vector<Outcome<CqState>> measure_register(const CqState& s, const std::string& reg) {
  std::vector<Outcome<CqState>> out;
  const int cp = find_register(s.classical_regs(), reg);
  if (cp >= 0) {
    for (int v = 0; v < s.classical_regs()[cp].dim; ++v) {
      CqState post(s.classical_regs(), s.quantum_regs());
      double p = 0.0;
      for (const auto& [k, b] : s.blocks())
        if (k[cp] == v) p += b.weight;
      if (p < 1e-14) continue;
      for (const auto& [k, b] : s.blocks())
        if (k[cp] == v) post.add(k, b.weight / p, b.rho);
      out.push_back({v, p, std::move(post)});
    }
    return out;
  }
  const int qp = require_register(s.quantum_regs(), reg);
  const auto& q = s.quantum_regs();
  std::size_t stride = 1;
  for (std::size_t i = static_cast<std::size_t>(qp) + 1; i < q.size(); ++i) stride *= static_cast<std::size_t>(q[i].dim);
  const auto d = static_cast<std::size_t>(q[qp].dim);
  const std::size_t dq = s.quantum_dim();
  for (std::size_t v = 0; v < d; ++v) {
    RVec mask = RVec::Zero(static_cast<Eigen::Index>(dq));
    for (std::size_t i = 0; i < dq; ++i)
      if ((i / stride) % d == v) mask[static_cast<Eigen::Index>(i)] = 1.0;
    const Mat proj = mask.cast<cplx>().asDiagonal();
    double p = 0.0;
    for (const auto& [k, b] : s.blocks()) p += b.weight * (proj * b.rho * proj).trace().real();
    if (p < 1e-14) continue;
    CqState post(s.classical_regs(), s.quantum_regs());
    for (const auto& [k, b] : s.blocks()) post.add_unnormalized(k, b.weight * proj * b.rho * proj / p);
    out.push_back({static_cast<int>(v), p, std::move(post)});
  }
  return out;
}

}  // namespace qmc
