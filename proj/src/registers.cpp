#include "qmc/registers.hpp"

#include <algorithm>
#include <set>

namespace qmc {

std::size_t total_dim(const RegList& regs) {
  std::size_t d = 1;
  for (const auto& r : regs) d *= static_cast<std::size_t>(r.dim);
  return d;
}

int find_register(const RegList& regs, const std::string& name) {
  for (std::size_t i = 0; i < regs.size(); ++i)
    if (regs[i].name == name) return static_cast<int>(i);
  return -1;
}

int require_register(const RegList& regs, const std::string& name) {
  int i = find_register(regs, name);
  if (i < 0) throw ValidationError("unknown register '" + name + "'");
  return i;
}

void check_registers(const RegList& regs) {
  std::set<std::string> seen;
  for (const auto& r : regs) {
    if (r.dim < 1) throw ValidationError("register '" + r.name + "' has dim < 1");
    if (!seen.insert(r.name).second) throw ValidationError("duplicate register '" + r.name + "'");
  }
}

RegList concat(const RegList& a, const RegList& b) {
  RegList out = a;
  out.insert(out.end(), b.begin(), b.end());
  check_registers(out);
  return out;
}

std::vector<std::string> names_of(const RegList& regs) {
  std::vector<std::string> out;
  for (const auto& r : regs) out.push_back(r.name);
  return out;
}

RegList sorted_by_name(const RegList& regs) {
  RegList out = regs;
  std::sort(out.begin(), out.end(), [](const Register& x, const Register& y) { return x.name < y.name; });
  return out;
}

bool same_register_set(const RegList& a, const RegList& b) {
  return sorted_by_name(a) == sorted_by_name(b);
}

std::vector<std::size_t> permutation_map(const RegList& regs, const std::vector<int>& perm) {
  const std::size_t n = regs.size();
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t i = n; i-- > 1;) stride[i - 1] = stride[i] * static_cast<std::size_t>(regs[i].dim);
  const std::size_t total = total_dim(regs);
  std::vector<std::size_t> out(total);
  std::vector<int> digit(perm.size(), 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t old = 0;
    for (std::size_t k = 0; k < perm.size(); ++k) old += static_cast<std::size_t>(digit[k]) * stride[perm[k]];
    out[idx] = old;
    for (std::size_t k = perm.size(); k-- > 0;) {
      if (++digit[k] < regs[perm[k]].dim) break;
      digit[k] = 0;
    }
  }
  return out;
}

std::vector<int> positions_of(const RegList& regs, const std::vector<std::string>& names) {
  std::vector<int> out;
  std::set<std::string> seen;
  for (const auto& nm : names) {
    if (!seen.insert(nm).second) throw ValidationError("register '" + nm + "' listed twice");
    out.push_back(require_register(regs, nm));
  }
  return out;
}

std::vector<int> complement(std::size_t n, const std::vector<int>& pos) {
  std::vector<int> out;
  for (std::size_t i = 0; i < n; ++i)
    if (std::find(pos.begin(), pos.end(), static_cast<int>(i)) == pos.end()) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace qmc
