#include "qmc/state.hpp"

#include <algorithm>
#include <cmath>

namespace qmc {

namespace {

void check_dim(std::size_t got, const RegList& regs, const char* what) {
  if (got != total_dim(regs))
    throw ValidationError(std::string(what) + ": size " + std::to_string(got) + " does not match registers (" +
                          std::to_string(total_dim(regs)) + ")");
}

std::vector<int> order_positions(const RegList& regs, const std::vector<std::string>& order) {
  auto pos = positions_of(regs, order);
  if (pos.size() != regs.size()) throw ValidationError("permutation must list every register");
  return pos;
}

RegList pick(const RegList& regs, const std::vector<int>& pos) {
  RegList out;
  for (int p : pos) out.push_back(regs[p]);
  return out;
}

}  // namespace

StateVector::StateVector(Vec amps, RegList regs, bool validate) : amps_(std::move(amps)), regs_(std::move(regs)) {
  check_registers(regs_);
  check_dim(static_cast<std::size_t>(amps_.size()), regs_, "state vector");
  if (validate && std::abs(amps_.norm() - 1.0) > 1e-12)
    throw ValidationError("state vector norm " + std::to_string(amps_.norm()) + " differs from 1");
}

Mat StateVector::as_matrix(const std::vector<std::string>& rows) const {
  auto rpos = positions_of(regs_, rows);
  auto cpos = complement(regs_.size(), rpos);
  std::vector<int> perm = rpos;
  perm.insert(perm.end(), cpos.begin(), cpos.end());
  auto map = permutation_map(regs_, perm);
  const std::size_t dr = total_dim(pick(regs_, rpos));
  const std::size_t dc = dim() / dr;
  Mat m(dr, dc);
  for (std::size_t i = 0; i < dr; ++i)
    for (std::size_t j = 0; j < dc; ++j) m(i, j) = amps_[map[i * dc + j]];
  return m;
}

DensityOperator::DensityOperator(Mat m, RegList regs, bool validate_now) : m_(std::move(m)), regs_(std::move(regs)) {
  check_registers(regs_);
  if (m_.rows() != m_.cols()) throw ValidationError("density operator must be square");
  check_dim(static_cast<std::size_t>(m_.rows()), regs_, "density operator");
  if (validate_now) validate();
}

void DensityOperator::validate() const {
  if (!is_hermitian(m_, 1e-12)) throw ValidationError("density operator is not Hermitian within 1e-12");
  const double tr = m_.trace().real();
  if (std::abs(tr - 1.0) > 1e-10) throw ValidationError("density operator trace " + std::to_string(tr) + " != 1");
  if (min_eigenvalue(m_) < -1e-10) throw ValidationError("density operator has a negative eigenvalue below -1e-10");
}

DensityOperator DensityOperator::from_pure(const StateVector& psi) {
  return DensityOperator(psi.amps() * psi.amps().adjoint(), psi.regs(), false);
}

DensityOperator DensityOperator::maximally_mixed(const RegList& regs) {
  const auto d = static_cast<Eigen::Index>(total_dim(regs));
  return DensityOperator(Mat::Identity(d, d) / static_cast<double>(d), regs, false);
}

DensityOperator tensor(const DensityOperator& a, const DensityOperator& b) {
  return DensityOperator(kron(a.matrix(), b.matrix()), concat(a.regs(), b.regs()), false);
}

StateVector tensor(const StateVector& a, const StateVector& b) {
  return StateVector(kron(a.amps(), b.amps()), concat(a.regs(), b.regs()), false);
}

Mat permute_matrix(const Mat& m, const RegList& regs, const std::vector<int>& perm) {
  auto map = permutation_map(regs, perm);
  const auto d = static_cast<Eigen::Index>(map.size());
  Mat out(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) out(i, j) = m(map[i], map[j]);
  return out;
}

Mat partial_trace_matrix(const Mat& m, const RegList& regs, const std::vector<int>& keep) {
  auto traced = complement(regs.size(), keep);
  std::vector<int> perm = keep;
  perm.insert(perm.end(), traced.begin(), traced.end());
  auto map = permutation_map(regs, perm);
  const std::size_t dk = total_dim(pick(regs, keep));
  const std::size_t dt = map.size() / dk;
  Mat out = Mat::Zero(dk, dk);
  for (std::size_t i = 0; i < dk; ++i)
    for (std::size_t j = 0; j < dk; ++j) {
      cplx s = 0.0;
      for (std::size_t t = 0; t < dt; ++t) s += m(map[i * dt + t], map[j * dt + t]);
      out(i, j) = s;
    }
  return out;
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::string>& over) {
  auto tpos = positions_of(rho.regs(), over);
  auto keep = complement(rho.regs().size(), tpos);
  return DensityOperator(partial_trace_matrix(rho.matrix(), rho.regs(), keep), pick(rho.regs(), keep), false);
}

DensityOperator partial_trace(const StateVector& psi, const std::vector<std::string>& over) {
  auto tpos = positions_of(psi.regs(), over);
  auto keep = complement(psi.regs().size(), tpos);
  RegList kept = pick(psi.regs(), keep);
  Mat m = psi.as_matrix(names_of(kept));
  return DensityOperator(m * m.adjoint(), kept, false);
}

DensityOperator marginal(const DensityOperator& rho, const std::vector<std::string>& keep) {
  auto kpos = positions_of(rho.regs(), keep);
  return DensityOperator(partial_trace_matrix(rho.matrix(), rho.regs(), kpos), pick(rho.regs(), kpos), false);
}

DensityOperator permute(const DensityOperator& rho, const std::vector<std::string>& order) {
  auto perm = order_positions(rho.regs(), order);
  return DensityOperator(permute_matrix(rho.matrix(), rho.regs(), perm), pick(rho.regs(), perm), false);
}

StateVector permute(const StateVector& psi, const std::vector<std::string>& order) {
  auto perm = order_positions(psi.regs(), order);
  auto map = permutation_map(psi.regs(), perm);
  Vec out(psi.amps().size());
  for (std::size_t i = 0; i < map.size(); ++i) out[static_cast<Eigen::Index>(i)] = psi.amps()[map[i]];
  return StateVector(out, pick(psi.regs(), perm), false);
}

StateVector purify(const DensityOperator& rho, const std::string& purifier) {
  if (find_register(rho.regs(), purifier) >= 0) throw ValidationError("purifier name already in use");
  Eigh e = psd_eigh(rho.matrix());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = e.values.size(); i-- > 0;)
    if (e.values[i] > kSupportTol) idx.push_back(i);
  const auto r = static_cast<Eigen::Index>(idx.size());
  if (r == 0) throw ValidationError("cannot purify a zero operator");
  const auto d = static_cast<Eigen::Index>(rho.dim());
  Vec amps = Vec::Zero(d * r);
  for (Eigen::Index k = 0; k < r; ++k) {
    const double s = std::sqrt(e.values[idx[k]]);
    for (Eigen::Index a = 0; a < d; ++a) amps[a * r + k] = s * e.vectors(a, idx[k]);
  }
  RegList regs = rho.regs();
  regs.push_back(quantum(purifier, static_cast<int>(r)));
  return StateVector(amps, regs, false);
}

namespace {

void check_isometry_shape(const Mat& v, const RegList& src, const RegList& tgt) {
  if (static_cast<std::size_t>(v.cols()) != total_dim(src) || static_cast<std::size_t>(v.rows()) != total_dim(tgt))
    throw ValidationError("isometry shape does not match source/target registers");
  if (!is_isometry(v, 1e-10)) throw ValidationError("operator is not an isometry within 1e-10");
}

}  // namespace

StateVector apply_isometry(const Mat& v, const StateVector& psi, const std::vector<std::string>& source,
                           const RegList& target) {
  auto spos = positions_of(psi.regs(), source);
  auto rest = complement(psi.regs().size(), spos);
  RegList src = pick(psi.regs(), spos);
  RegList kept = pick(psi.regs(), rest);
  check_isometry_shape(v, src, target);
  RegList out_regs = concat(kept, target);
  std::vector<std::string> order = names_of(kept);
  for (const auto& r : src) order.push_back(r.name);
  const Vec flat = permute(psi, order).amps();
  const auto dk = static_cast<Eigen::Index>(total_dim(kept));
  const auto ds = static_cast<Eigen::Index>(total_dim(src));
  Mat ms(dk, ds);
  for (Eigen::Index r = 0; r < dk; ++r)
    for (Eigen::Index c = 0; c < ds; ++c) ms(r, c) = flat[r * ds + c];
  Mat res = ms * v.transpose();
  Vec out(res.size());
  for (Eigen::Index r = 0; r < res.rows(); ++r)
    for (Eigen::Index c = 0; c < res.cols(); ++c) out[r * res.cols() + c] = res(r, c);
  return StateVector(out, out_regs, false);
}

DensityOperator apply_isometry(const Mat& v, const DensityOperator& rho, const std::vector<std::string>& source,
                               const RegList& target) {
  auto spos = positions_of(rho.regs(), source);
  auto rest = complement(rho.regs().size(), spos);
  RegList src = pick(rho.regs(), spos);
  RegList kept = pick(rho.regs(), rest);
  check_isometry_shape(v, src, target);
  std::vector<int> perm = rest;
  perm.insert(perm.end(), spos.begin(), spos.end());
  Mat m = permute_matrix(rho.matrix(), rho.regs(), perm);
  const auto dk = static_cast<Eigen::Index>(total_dim(kept));
  Mat full = kron(Mat::Identity(dk, dk), v);
  return DensityOperator(full * m * full.adjoint(), concat(kept, target), false);
}

std::vector<Outcome<StateVector>> measure_register(const StateVector& psi, const std::string& reg) {
  const int p = require_register(psi.regs(), reg);
  const auto& regs = psi.regs();
  std::size_t stride = 1;
  for (std::size_t i = static_cast<std::size_t>(p) + 1; i < regs.size(); ++i) stride *= static_cast<std::size_t>(regs[i].dim);
  const auto d = static_cast<std::size_t>(regs[p].dim);
  std::vector<Outcome<StateVector>> out;
  for (std::size_t k = 0; k < d; ++k) {
    Vec proj = Vec::Zero(psi.amps().size());
    for (std::size_t i = 0; i < psi.dim(); ++i)
      if ((i / stride) % d == k) proj[static_cast<Eigen::Index>(i)] = psi.amps()[static_cast<Eigen::Index>(i)];
    const double prob = proj.squaredNorm();
    if (prob < 1e-14) continue;
    out.push_back({static_cast<int>(k), prob, StateVector(proj / std::sqrt(prob), regs, false)});
  }
  return out;
}

double fidelity(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw ValidationError("fidelity: dimension mismatch");
  return trace_norm(sqrtm_psd(rho) * sqrtm_psd(sigma));
}

double trace_distance(const Mat& rho, const Mat& sigma) {
  if (rho.rows() != sigma.rows()) throw ValidationError("trace distance: dimension mismatch");
  return 0.5 * eigh(rho - sigma).values.cwiseAbs().sum();
}

double purified_from_fidelity(double f) { return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, f) * std::min(1.0, f))); }

DensityOperator canonical(const DensityOperator& rho) { return permute(rho, names_of(sorted_by_name(rho.regs()))); }

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
  if (!same_register_set(rho.regs(), sigma.regs())) throw ValidationError("fidelity: register lists differ");
  return fidelity(canonical(rho).matrix(), canonical(sigma).matrix());
}

double distance(Metric metric, const DensityOperator& rho, const DensityOperator& sigma) {
  if (!same_register_set(rho.regs(), sigma.regs())) throw ValidationError("distance: register lists differ");
  const Mat a = canonical(rho).matrix();
  const Mat b = canonical(sigma).matrix();
  switch (metric) {
    case Metric::fidelity: return std::min(1.0, fidelity(a, b));
    case Metric::trace: return trace_distance(a, b);
    case Metric::purified: return purified_from_fidelity(fidelity(a, b));
  }
  return 0.0;
}

}  // namespace qmc
