#include <cmath>
#include <map>
#include <set>
#include <utility>

#include "compression_engine.hpp"
#include "qmc/compression.hpp"

namespace qmc {

// Block i+1 uses the randomness block i returns: Alice's seed comes from
// (J, C2), Bob's from (J', C2'), both topped up with the same fresh index u.
// The joint output of all blocks is tracked exactly through its overlap with
// the ideal product state, which is pure on every classical key.
RecycleReport run_recycled_blocks(const CompressionScenario& sc, int blocks) {
  if (blocks < 1) throw ValidationError("blocks must be >= 1");
  if (blocks > 4) throw BudgetExceeded("recycling simulation is limited to 4 blocks");
  if (sc.sigma) throw ValidationError("recycling needs the uniform sigma_C");
  RecycleReport out;
  const CompressionReport single = run_protocol(sc);
  const Params params = single.params;
  const detail::Engine eng(sc, params);
  const int n = eng.n;
  const int qc = eng.qc;
  const std::size_t S = eng.fam->num_seeds();
  const std::size_t returned = static_cast<std::size_t>(n) * static_cast<std::size_t>(qc);
  if (S % returned != 0) throw ValidationError("n * |C| must divide the seed count for exact recycling");
  const std::size_t topup = S / returned;
  out.topup_bits = std::log2(static_cast<double>(topup));

  auto seed_of = [&](int j, int c2, std::size_t u) {
    return (static_cast<std::size_t>(j) * qc + static_cast<std::size_t>(c2)) * topup + u;
  };

  // State: (history of C1 values, jA, jB, c2A, c2B) -> summed product overlap.
  using State = std::tuple<long long, int, int, int, int>;
  std::map<State, double> cur;
  std::map<std::pair<std::size_t, std::size_t>, detail::BranchOut> memo;

  auto compute = [&](const std::set<std::pair<std::size_t, std::size_t>>& need) {
    std::vector<std::pair<std::size_t, std::size_t>> todo;
    for (const auto& pr : need)
      if (!memo.count(pr)) todo.push_back(pr);
    std::vector<detail::BranchOut> res(todo.size());
    const auto cnt = static_cast<long long>(todo.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long long i = 0; i < cnt; ++i) {
      const auto& pr = todo[static_cast<std::size_t>(i)];
      res[static_cast<std::size_t>(i)] = eng.run(pr.first, pr.second, false, false);
    }
    for (std::size_t i = 0; i < todo.size(); ++i) memo.emplace(todo[i], std::move(res[i]));
  };

  {
    std::set<std::pair<std::size_t, std::size_t>> need;
    for (std::size_t s = 0; s < S; ++s) need.insert({s, s});
    compute(need);
    const double w = 1.0 / static_cast<double>(S);
    for (std::size_t s = 0; s < S; ++s)
      for (const auto& r : memo.at({s, s}).recs)
        if (r.c1 == r.c1p && r.ov > 0.0) cur[{r.c1, r.j, r.jp, r.c2, r.c2p}] += w * r.ov;
  }
  for (int blk = 1; blk < blocks; ++blk) {
    auto pair_for = [&](const State& st, std::size_t u) {
      const auto& [h, ja, jb, ca, cb] = st;
      (void)h;
      return std::make_pair(seed_of(ja, ca, u), seed_of(jb == n ? 0 : jb, cb, u));
    };
    std::set<std::pair<std::size_t, std::size_t>> need;
    for (const auto& [st, a] : cur)
      for (std::size_t u = 0; u < topup; ++u) need.insert(pair_for(st, u));
    compute(need);
    std::map<State, double> next;
    const double w = 1.0 / static_cast<double>(topup);
    for (const auto& [st, a] : cur) {
      const long long h = std::get<0>(st);
      for (std::size_t u = 0; u < topup; ++u)
        for (const auto& r : memo.at(pair_for(st, u)).recs)
          if (r.c1 == r.c1p && r.ov > 0.0) next[{h * qc + r.c1, r.j, r.jp, r.c2, r.c2p}] += a * w * r.ov;
    }
    cur = std::move(next);
  }

  double f = 0.0;
  for (const auto& [st, a] : cur) {
    const auto& [h, ja, jb, ca, cb] = st;
    if (ja != jb || ca != cb) continue;
    double wi = 1.0 / (static_cast<double>(n) * qc);
    long long x = h;
    for (int i = 0; i < blocks; ++i) {
      wi *= eng.cm.p[static_cast<int>(x % qc)];
      x /= qc;
    }
    f += std::sqrt(std::max(0.0, wi * a));
  }
  out.cumulative_distance = purified_from_fidelity(std::min(1.0, f));
  for (int i = 0; i < blocks; ++i) {
    out.blocks.push_back(single);
    out.bound += single.final_distance;
    out.consumed_bits.push_back(single.r1 - single.r2_proof);
  }
  out.pass = out.cumulative_distance <= out.bound + 1e-6;
  return out;
}

}  // namespace qmc
