#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qmc {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input or invariant violation (bad register name, dimension mismatch, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Refusal because a computation would exceed the desk-scale budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

enum class Kind { classical, quantum };

struct Register {
  std::string name;
  int dim = 1;
  Kind kind = Kind::quantum;

  bool operator==(const Register& o) const {
    return name == o.name && dim == o.dim && kind == o.kind;
  }
};

using RegList = std::vector<Register>;

inline Register quantum(std::string name, int dim) { return {std::move(name), dim, Kind::quantum}; }
inline Register classical(std::string name, int dim) { return {std::move(name), dim, Kind::classical}; }

std::size_t total_dim(const RegList& regs);
// Index of the named register or -1.
int find_register(const RegList& regs, const std::string& name);
int require_register(const RegList& regs, const std::string& name);
void check_registers(const RegList& regs);
RegList concat(const RegList& a, const RegList& b);
std::vector<std::string> names_of(const RegList& regs);
RegList sorted_by_name(const RegList& regs);
bool same_register_set(const RegList& a, const RegList& b);

// For a reordering of the registers (perm[k] = old position of the k-th new
// register) returns map[new_flat_index] = old_flat_index.
std::vector<std::size_t> permutation_map(const RegList& regs, const std::vector<int>& perm);

// Positions of `names` in `regs` (throws on unknown names or duplicates).
std::vector<int> positions_of(const RegList& regs, const std::vector<std::string>& names);

// Complement of `pos` in [0, regs.size()), in original order.
std::vector<int> complement(std::size_t n, const std::vector<int>& pos);

}  // namespace qmc
