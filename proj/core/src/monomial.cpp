// Copyright 2026 The chainrule Authors.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "chainrule/monomial.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <limits>
#include <map>
#include <set>
#include <thread>
#include <unordered_map>

#include "chainrule/error.hpp"

namespace chainrule {
namespace {

using Mask = std::uint64_t;
constexpr std::size_t kMaskBits = 64;

int bits(Mask m) { return std::popcount(m); }
bool subset(Mask a, Mask b) { return (a & ~b) == 0; }

std::vector<std::size_t> atoms_of(Mask m) {
  std::vector<std::size_t> out;
  while (m) {
    out.push_back(static_cast<std::size_t>(std::countr_zero(m)));
    m &= m - 1;
  }
  return out;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

// One union/multiplication: z = x | y with x & y == 0.
struct Op {
  Mask x = 0;
  Mask y = 0;
  Mask z = 0;
};

// Kernel records use masks over the original atoms.
// Merge: atoms that occur in exactly the same targets, multiplied together
// first. Extension: a target finished as base * part after the core search.
struct Merge {
  std::vector<Mask> parts;
};
struct Extension {
  Mask base = 0;
  Mask part = 0;
};

struct Kernel {
  std::vector<Mask> core;  // distinct, >= 2 atoms each, over representative bits
  std::vector<Merge> merges;
  std::vector<Extension> extensions;  // creation order
  std::size_t extra_cost = 0;
  std::array<Mask, kMaskBits> expansion{};  // representative bit -> original atoms

  Mask expand(Mask m) const {
    Mask out = 0;
    for (std::size_t a : atoms_of(m)) out |= expansion[a];
    return out;
  }
};

std::vector<Mask> dedupe(std::vector<Mask> masks) {
  std::sort(masks.begin(), masks.end());
  masks.erase(std::unique(masks.begin(), masks.end()), masks.end());
  return masks;
}

// Two exact reductions, repeated until neither applies:
//  * atoms with the same target signature behave as one atom: an optimal
//    solution can drop all but one of them and use their product instead;
//  * an atom in a single target can be multiplied in last.
Kernel kernelize(std::vector<Mask> targets, bool enabled) {
  Kernel kernel;
  for (std::size_t a = 0; a < kMaskBits; ++a) kernel.expansion[a] = Mask{1} << a;
  targets = dedupe(std::move(targets));
  for (bool changed = enabled; changed;) {
    changed = false;
    Mask all = 0;
    for (Mask t : targets) all |= t;
    std::map<std::vector<bool>, Mask> classes;
    for (std::size_t a : atoms_of(all)) {
      std::vector<bool> signature;
      for (Mask t : targets) signature.push_back((t >> a) & 1);
      classes[signature] |= Mask{1} << a;
    }
    for (const auto& [signature, members] : classes) {
      if (bits(members) < 2) continue;
      changed = true;
      const std::size_t rep = static_cast<std::size_t>(std::countr_zero(members));
      Merge merge;
      Mask full = 0;
      for (std::size_t a : atoms_of(members)) {
        merge.parts.push_back(kernel.expansion[a]);
        full |= kernel.expansion[a];
      }
      kernel.merges.push_back(std::move(merge));
      kernel.extra_cost += static_cast<std::size_t>(bits(members)) - 1;
      kernel.expansion[rep] = full;
      const Mask drop = members & ~(Mask{1} << rep);
      for (Mask& t : targets) {
        if (t & drop) t = (t & ~drop) | (Mask{1} << rep);
      }
    }

    std::map<std::size_t, int> counts;
    for (Mask t : targets) {
      for (std::size_t a : atoms_of(t)) ++counts[a];
    }
    std::vector<Mask> next;
    for (Mask t : targets) {
      Mask priv = 0;
      for (std::size_t a : atoms_of(t)) {
        if (counts[a] == 1) priv |= Mask{1} << a;
      }
      // After merging at most one private (super-)atom remains per target.
      const Mask base = t & ~priv;
      if (priv == 0 || base == 0) {
        if (bits(t) >= 2) next.push_back(t);
        continue;
      }
      changed = true;
      kernel.extensions.push_back({kernel.expand(base), kernel.expand(priv)});
      kernel.extra_cost += 1;
      if (bits(base) >= 2) next.push_back(base);
    }
    targets = dedupe(std::move(next));
  }
  kernel.core = std::move(targets);
  return kernel;
}

struct StateKeyHash {
  std::size_t operator()(const std::vector<Mask>& key) const noexcept {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL;
    for (Mask m : key) {
      h ^= m + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

struct State {
  std::vector<Mask> produced;  // creation order
  std::vector<char> used;      // produced[i] consumed as an operand
  std::vector<char> done;      // per core target

  bool has(Mask m) const {
    if (bits(m) == 1) return true;
    return std::find(produced.begin(), produced.end(), m) != produced.end();
  }
  void mark_used(Mask m) {
    if (bits(m) == 1) return;
    for (std::size_t i = 0; i < produced.size(); ++i) {
      if (produced[i] == m) used[i] = 1;
    }
  }
  void apply(const Op& op) {
    mark_used(op.x);
    mark_used(op.y);
    produced.push_back(op.z);
    used.push_back(0);
  }
};

// Exact depth-bounded search over the core targets. One instance per worker.
class Searcher {
 public:
  Searcher(const std::vector<Mask>& targets, const SearchConfig& config)
      : targets_(targets), config_(config) {}

  SearchStats stats;

  // Forms every target that is one union away. Returns false if the budget
  // runs out. Forming such a target now never hurts: any solution's op that
  // forms it can be replaced by this one.
  bool close(State& s, std::size_t& budget, std::vector<Op>& path) const {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t t = 0; t < targets_.size(); ++t) {
        if (s.done[t]) continue;
        const Mask target = targets_[t];
        std::optional<Op> op;
        if (s.has(target)) {
          s.done[t] = 1;
          changed = true;
          continue;
        }
        for (Mask x : s.produced) {
          if (x != target && subset(x, target) && s.has(target ^ x)) {
            op = Op{x, target ^ x, target};
            break;
          }
        }
        if (!op) {
          for (std::size_t a : atoms_of(target)) {
            const Mask x = Mask{1} << a;
            if (s.has(target ^ x)) {
              op = Op{x, target ^ x, target};
              break;
            }
          }
        }
        if (!op) continue;
        if (budget == 0) return false;
        --budget;
        s.apply(*op);
        s.done[t] = 1;
        path.push_back(*op);
        changed = true;
      }
    }
    return true;
  }

  // Fewest available sets that partition t. Singletons fill any gap, so this
  // is |t| minus the best total (|x| - 1) over disjoint produced x inside t.
  static std::size_t min_cover(Mask t, const std::vector<Mask>& inside) {
    std::size_t best = 0;
    auto search = [&](auto&& self, std::size_t from, Mask used, std::size_t gain) -> void {
      best = std::max(best, gain);
      for (std::size_t j = from; j < inside.size(); ++j) {
        if (inside[j] & used) continue;
        self(self, j + 1, used | inside[j], gain + bits(inside[j]) - 1);
      }
    };
    search(search, 0, 0, 0);
    return static_cast<std::size_t>(bits(t)) - best;
  }

  std::size_t lower_bound(const State& s) const {
    std::vector<Mask> open;
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      if (!s.done[t]) open.push_back(targets_[t]);
    }
    if (open.empty()) return 0;
    auto is_open = [&](Mask m) { return std::find(open.begin(), open.end(), m) != open.end(); };

    std::size_t private_sum = 0;
    std::size_t best_partition = 0;
    // Non-target products that must be built strictly inside each target.
    std::vector<std::size_t> need(open.size(), 0);
    for (std::size_t i = 0; i < open.size(); ++i) {
      const Mask t = open[i];
      Mask others = 0;
      std::size_t not_inside = 0;
      std::size_t targets_inside = 0;
      for (std::size_t j = 0; j < open.size(); ++j) {
        if (j == i) continue;
        others |= open[j];
        if (!subset(open[j], t)) ++not_inside;
        else ++targets_inside;
      }
      const Mask priv = t & ~others;
      std::size_t largest_private = 1;
      bool mixed_leaf = false;
      std::vector<Mask> inside;
      for (Mask x : s.produced) {
        if (x == t || !subset(x, t)) continue;
        inside.push_back(x);
        if (x & priv) {
          largest_private = std::max<std::size_t>(largest_private, bits(x & priv));
          if (x & ~priv) mixed_leaf = true;
        }
      }
      // Ops whose sets hold a private atom of t serve t alone.
      std::size_t private_ops = 0;
      if (priv) {
        const std::size_t leaves = ceil_div(bits(priv), largest_private);
        const bool extra_root = (t & ~priv) != 0 && !mixed_leaf;
        private_ops = extra_root ? leaves : leaves - 1;
      }
      private_sum += std::max<std::size_t>(1, private_ops);
      // t's tree has at least `cover` leaves; add the roots of targets that
      // cannot sit inside it.
      const std::size_t cover = min_cover(t, inside);
      best_partition = std::max(best_partition, cover - 1 + not_inside);

      if (cover >= 2 + targets_inside) need[i] = cover - 2 - targets_inside;
      if (need[i] == 0) {
        // The root op of t needs a new non-target operand unless t splits
        // into pieces that are available or are open targets.
        auto ready = [&](Mask m) { return s.has(m) || is_open(m); };
        bool splits = false;
        for (std::size_t a : atoms_of(t)) {
          if (ready(t ^ (Mask{1} << a))) splits = true;
        }
        for (Mask x : inside) {
          if (!splits && ready(t ^ x)) splits = true;
        }
        for (Mask x : open) {
          if (!splits && x != t && subset(x, t) && ready(t ^ x)) splits = true;
        }
        if (!splits) need[i] = 1;
      }
    }
    // Targets sharing at most one atom cannot share a product.
    std::size_t best_need = 0;
    if (open.size() <= 16) {
      auto search = [&](auto&& self, std::size_t from, std::vector<std::size_t>& chosen,
                        std::size_t total) -> void {
        best_need = std::max(best_need, total);
        for (std::size_t j = from; j < open.size(); ++j) {
          if (need[j] == 0) continue;
          bool compatible = true;
          for (std::size_t c : chosen) {
            if (bits(open[c] & open[j]) >= 2) compatible = false;
          }
          if (!compatible) continue;
          chosen.push_back(j);
          self(self, j + 1, chosen, total + need[j]);
          chosen.pop_back();
        }
      };
      std::vector<std::size_t> chosen;
      search(search, 0, chosen, 0);
    } else {
      best_need = *std::max_element(need.begin(), need.end());
    }
    // A product of two or more atoms lies inside at most `mult` open targets,
    // so the needs of all targets together take ceil(sum / mult) products.
    std::size_t need_sum = 0;
    for (std::size_t n : need) need_sum += n;
    if (need_sum > best_need) {
      Mask atoms = 0;
      for (Mask t : open) atoms |= t;
      std::size_t mult = 1;
      const auto list = atoms_of(atoms);
      for (std::size_t x = 0; x < list.size() && mult < open.size(); ++x) {
        for (std::size_t y = x + 1; y < list.size(); ++y) {
          const Mask pair = (Mask{1} << list[x]) | (Mask{1} << list[y]);
          const auto count = static_cast<std::size_t>(std::count_if(
              open.begin(), open.end(), [&](Mask t) { return subset(pair, t); }));
          mult = std::max(mult, count);
        }
      }
      best_need = std::max(best_need, ceil_div(need_sum, mult));
    }
    const std::size_t sharing = open.size() + best_need;

    std::size_t dangling = 0;
    for (std::size_t i = 0; i < s.produced.size(); ++i) {
      if (!s.used[i] && !is_target(s.produced[i])) ++dangling;
    }
    return std::max({private_sum, best_partition, sharing, ceil_div(dangling, 2)});
  }

  // Distinct next products, best first.
  std::vector<Op> candidates(const State& s) const {
    std::vector<Mask> open;
    Mask open_atoms = 0;
    for (std::size_t t = 0; t < targets_.size(); ++t) {
      if (!s.done[t]) {
        open.push_back(targets_[t]);
        open_atoms |= targets_[t];
      }
    }
    auto inside_open = [&](Mask m) {
      return std::any_of(open.begin(), open.end(), [&](Mask t) { return subset(m, t); });
    };
    std::vector<Mask> pieces;
    for (std::size_t a : atoms_of(open_atoms)) pieces.push_back(Mask{1} << a);
    for (Mask x : s.produced) {
      if (inside_open(x)) pieces.push_back(x);
    }
    std::vector<Op> ops;
    std::set<Mask> seen;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      for (std::size_t j = i + 1; j < pieces.size(); ++j) {
        const Mask x = pieces[i], y = pieces[j];
        if (x & y) continue;
        const Mask z = x | y;
        if (!inside_open(z) || s.has(z) || !seen.insert(z).second) continue;
        ops.push_back(Op{x, y, z});
      }
    }
    auto shared = [&](Mask z) {
      return std::count_if(open.begin(), open.end(), [&](Mask t) { return subset(z, t); });
    };
    std::stable_sort(ops.begin(), ops.end(), [&](const Op& a, const Op& b) {
      const auto sa = shared(a.z), sb = shared(b.z);
      if (sa != sb) return sa > sb;
      if (bits(a.z) != bits(b.z)) return bits(a.z) > bits(b.z);
      return a.z < b.z;
    });
    return ops;
  }

  // True if z is a disjoint union of two sets available before produced[end].
  bool formable_within(const State& s, Mask z, std::size_t end) const {
    auto available = [&](Mask m) {
      if (bits(m) == 1) return true;
      return std::find(s.produced.begin(), s.produced.begin() + end, m) !=
             s.produced.begin() + end;
    };
    for (std::size_t a : atoms_of(z)) {
      if (available(z ^ (Mask{1} << a))) return true;
    }
    for (std::size_t i = 0; i < end; ++i) {
      const Mask x = s.produced[i];
      if (x != z && subset(x, z) && available(z ^ x)) return true;
    }
    return false;
  }

  // Searches below an already closed state. `last` is the previous chosen
  // product, stored at produced[last_index]. Two chosen products that do not
  // depend on each other are only tried in increasing mask order.
  bool dfs(const State& s, std::size_t budget, std::vector<Op>& path, Mask last = 0,
           std::size_t last_index = 0) {
    if (aborted()) return false;
    ++stats.nodes;
    if (std::all_of(s.done.begin(), s.done.end(), [](char d) { return d != 0; })) return true;
    if (budget == 0 || lower_bound(s) > budget) return false;

    std::vector<Mask> key = s.produced;
    std::sort(key.begin(), key.end());
    key.push_back(last);
    if (auto it = memo_.find(key); it != memo_.end() && it->second >= budget) {
      ++stats.memo_hits;
      return false;
    }
    for (const Op& op : candidates(s)) {
      if (last != 0 && op.z < last && formable_within(s, op.z, last_index)) continue;
      State child = s;
      child.apply(op);
      const std::size_t index = child.produced.size() - 1;
      std::size_t child_budget = budget - 1;
      const std::size_t mark = path.size();
      path.push_back(op);
      if (close(child, child_budget, path) && dfs(child, child_budget, path, op.z, index)) {
        return true;
      }
      path.resize(mark);
      if (aborted()) return false;
    }
    if (memo_.size() >= config_.memo_limit) memo_.clear();
    auto& slot = memo_[std::move(key)];
    slot = std::max(slot, budget);
    return false;
  }

  void reset_memo() { memo_.clear(); }
  void set_abort(const std::atomic<std::size_t>* best, std::size_t branch) {
    best_branch_ = best;
    branch_ = branch;
  }

  bool is_target(Mask m) const {
    return std::find(targets_.begin(), targets_.end(), m) != targets_.end();
  }

 private:
  bool aborted() const {
    return best_branch_ != nullptr && best_branch_->load(std::memory_order_relaxed) < branch_;
  }

  const std::vector<Mask>& targets_;
  const SearchConfig& config_;
  std::unordered_map<std::vector<Mask>, std::size_t, StateKeyHash> memo_;
  const std::atomic<std::size_t>* best_branch_ = nullptr;
  std::size_t branch_ = 0;
};

struct CoreResult {
  bool found = false;
  std::vector<Op> ops;
};

// Is there a solution of the core with at most `budget` ops? Iterates the
// depth bound upward so that the first solution found is minimal.
CoreResult solve_core(const std::vector<Mask>& core, std::size_t budget,
                      const SearchConfig& config, SearchStats& stats) {
  Searcher root_searcher(core, config);
  State root;
  root.done.assign(core.size(), 0);
  std::vector<Op> root_path;
  std::size_t root_budget = std::numeric_limits<std::size_t>::max() / 2;
  root_searcher.close(root, root_budget, root_path);
  const std::size_t closed = root_path.size();
  if (closed > budget) return {};
  if (std::all_of(root.done.begin(), root.done.end(), [](char d) { return d != 0; })) {
    return {true, root_path};
  }
  const std::size_t first_depth = closed + root_searcher.lower_bound(root);
  const std::vector<Op> branches = root_searcher.candidates(root);
  const unsigned workers = std::max(1u, config.threads);

  for (std::size_t depth = std::max<std::size_t>(first_depth, closed + 1); depth <= budget;
       ++depth) {
    const std::size_t remaining = depth - closed;
    std::atomic<std::size_t> best{std::numeric_limits<std::size_t>::max()};
    std::atomic<std::size_t> next{0};
    std::vector<std::vector<Op>> found(branches.size());
    std::vector<SearchStats> worker_stats(workers);

    auto work = [&](unsigned w) {
      Searcher searcher(core, config);
      for (;;) {
        const std::size_t b = next.fetch_add(1);
        if (b >= branches.size() || b > best.load()) break;
        searcher.set_abort(&best, b);
        State child = root;
        child.apply(branches[b]);
        std::size_t child_budget = remaining - 1;
        const std::size_t index = child.produced.size() - 1;
        std::vector<Op> path{branches[b]};
        if (searcher.close(child, child_budget, path) &&
            searcher.dfs(child, child_budget, path, branches[b].z, index)) {
          found[b] = std::move(path);
          std::size_t current = best.load();
          while (b < current && !best.compare_exchange_weak(current, b)) {
          }
        }
      }
      worker_stats[w] = searcher.stats;
    };

    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    for (const auto& ws : worker_stats) {
      stats.nodes += ws.nodes;
      stats.memo_hits += ws.memo_hits;
    }
    if (best.load() != std::numeric_limits<std::size_t>::max()) {
      std::vector<Op> ops = root_path;
      for (const Op& op : found[best.load()]) ops.push_back(op);
      return {true, std::move(ops)};
    }
  }
  return {};
}

struct Prepared {
  std::vector<Mask> targets;  // per instance target, in order
  Kernel kernel;
};

Prepared prepare(const MonomialInstance& instance, const SearchConfig& config) {
  instance.validate();
  if (instance.atoms.size() > config.max_atoms || instance.atoms.size() > kMaskBits) {
    fail(ErrorCode::kInstanceTooLarge,
         std::to_string(instance.atoms.size()) + " atoms exceed the limit of " +
             std::to_string(std::min(config.max_atoms, kMaskBits)));
  }
  Prepared prepared;
  std::vector<Mask> nontrivial;
  for (const auto& target : instance.targets) {
    Mask m = 0;
    for (std::size_t a : target) m |= Mask{1} << a;
    prepared.targets.push_back(m);
    if (bits(m) >= 2) nontrivial.push_back(m);
  }
  prepared.kernel = kernelize(std::move(nontrivial), config.strip_private_atoms);
  return prepared;
}

// Turns merges, core ops and extensions into a schedule over the instance's atoms.
Schedule build_schedule(const MonomialInstance& instance, const Prepared& prepared,
                        const std::vector<Op>& core_ops) {
  Schedule schedule;
  std::unordered_map<Mask, std::size_t> step_of;
  auto ref = [&](Mask m) -> Operand {
    if (bits(m) == 1) return AtomOperand{instance.atoms[std::countr_zero(m)]};
    return StepOperand{step_of.at(m)};
  };
  auto emit = [&](Mask x, Mask y) {
    const Mask z = x | y;
    if (step_of.count(z)) return;
    schedule.steps.push_back(Step{ref(x), ref(y), std::nullopt, std::nullopt});
    step_of[z] = schedule.steps.size() - 1;
  };
  const Kernel& kernel = prepared.kernel;
  for (const Merge& merge : kernel.merges) {
    Mask acc = merge.parts.front();
    for (std::size_t i = 1; i < merge.parts.size(); ++i) {
      emit(acc, merge.parts[i]);
      acc |= merge.parts[i];
    }
  }
  for (const Op& op : core_ops) emit(kernel.expand(op.x), kernel.expand(op.y));
  for (auto it = kernel.extensions.rbegin(); it != kernel.extensions.rend(); ++it) {
    emit(it->base, it->part);
  }
  for (Mask t : prepared.targets) schedule.targets.push_back({ref(t)});
  return schedule;
}

}  // namespace

MonomialInstance MonomialInstance::from_labels(
    const std::vector<std::vector<std::string>>& targets) {
  MonomialInstance instance;
  std::map<std::string, std::size_t> index;
  for (const auto& target : targets) {
    std::vector<std::size_t> ids;
    for (const auto& label : target) {
      auto [it, inserted] = index.emplace(label, instance.atoms.size());
      if (inserted) instance.atoms.push_back(label);
      ids.push_back(it->second);
    }
    instance.targets.push_back(std::move(ids));
  }
  return instance;
}

void MonomialInstance::validate() const {
  if (targets.empty()) fail(ErrorCode::kInvalidInput, "no targets");
  std::set<std::string> names(atoms.begin(), atoms.end());
  if (names.size() != atoms.size()) fail(ErrorCode::kInvalidInput, "duplicate atom names");
  for (const auto& target : targets) {
    if (target.empty()) fail(ErrorCode::kInvalidInput, "empty target");
    std::set<std::size_t> seen;
    for (std::size_t a : target) {
      if (a >= atoms.size()) fail(ErrorCode::kInvalidInput, "target names an unknown atom");
      if (!seen.insert(a).second) {
        fail(ErrorCode::kInvalidInput, "target repeats atom '" + atoms[a] + "' (not squarefree)");
      }
    }
  }
}

std::size_t trivial_upper_bound(const MonomialInstance& instance) {
  std::set<std::set<std::size_t>> distinct;
  for (const auto& t : instance.targets) distinct.emplace(t.begin(), t.end());
  std::size_t total = 0;
  for (const auto& t : distinct) total += t.size() - 1;
  return total;
}

MinFmaResult monomial_min_fma(const MonomialInstance& instance, std::size_t K,
                              const SearchConfig& config) {
  if (K > config.max_k) {
    fail(ErrorCode::kInstanceTooLarge,
         "K = " + std::to_string(K) + " exceeds the limit of " + std::to_string(config.max_k));
  }
  const Prepared prepared = prepare(instance, config);
  MinFmaResult result;
  const std::size_t extra = prepared.kernel.extra_cost;
  if (extra > K) return result;
  CoreResult core = solve_core(prepared.kernel.core, K - extra, config, result.stats);
  if (!core.found) return result;
  result.feasible = true;
  result.minimum = core.ops.size() + extra;
  result.schedule = build_schedule(instance, prepared, core.ops);
  return result;
}

MinimumResult monomial_minimum(const MonomialInstance& instance, const SearchConfig& config) {
  const std::size_t limit = std::min(config.max_k, trivial_upper_bound(instance));
  MinFmaResult r = monomial_min_fma(instance, limit, config);
  if (!r.feasible) {
    fail(ErrorCode::kInstanceTooLarge,
         "minimum exceeds the search limit of " + std::to_string(config.max_k));
  }
  return {*r.minimum, std::move(*r.schedule), r.stats};
}

Schedule greedy_schedule(const MonomialInstance& instance) {
  instance.validate();
  Schedule schedule;
  // Symbols: atoms are 0..n-1, products get fresh ids.
  const std::size_t n = instance.atoms.size();
  std::vector<Operand> symbol_ref;
  for (std::size_t a = 0; a < n; ++a) symbol_ref.push_back(AtomOperand{instance.atoms[a]});

  std::vector<std::set<std::size_t>> distinct;
  std::vector<std::size_t> target_slot;
  for (const auto& t : instance.targets) {
    std::set<std::size_t> s(t.begin(), t.end());
    auto it = std::find(distinct.begin(), distinct.end(), s);
    target_slot.push_back(static_cast<std::size_t>(it - distinct.begin()));
    if (it == distinct.end()) distinct.push_back(std::move(s));
  }

  auto make_product = [&](std::size_t a, std::size_t b) {
    schedule.steps.push_back(Step{symbol_ref[a], symbol_ref[b], std::nullopt, std::nullopt});
    symbol_ref.push_back(StepOperand{schedule.steps.size() - 1});
    return symbol_ref.size() - 1;
  };

  for (;;) {
    std::map<std::pair<std::size_t, std::size_t>, int> freq;
    for (const auto& s : distinct) {
      for (auto i = s.begin(); i != s.end(); ++i) {
        for (auto j = std::next(i); j != s.end(); ++j) ++freq[{*i, *j}];
      }
    }
    if (freq.empty()) break;
    auto best = freq.begin();
    for (auto it = freq.begin(); it != freq.end(); ++it) {
      if (it->second > best->second) best = it;
    }
    if (best->second < 2) break;
    const auto [a, b] = best->first;
    const std::size_t product = make_product(a, b);
    for (auto& s : distinct) {
      if (s.count(a) && s.count(b)) {
        s.erase(a);
        s.erase(b);
        s.insert(product);
      }
    }
  }
  // Nothing left is shared; finish each target left to right.
  std::vector<std::size_t> final_symbol;
  for (auto& s : distinct) {
    auto it = s.begin();
    std::size_t acc = *it;
    for (++it; it != s.end(); ++it) acc = make_product(acc, *it);
    final_symbol.push_back(acc);
  }
  for (std::size_t slot : target_slot) schedule.targets.push_back({symbol_ref[final_symbol[slot]]});
  return schedule;
}

}  // namespace chainrule
