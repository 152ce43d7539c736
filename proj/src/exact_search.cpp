#include <algorithm>
#include <unordered_set>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"

namespace kpack {

namespace {

struct KeyHash {
  std::size_t operator()(const std::vector<std::uint64_t>& k) const {
    std::size_t h = 1469598103934665603ull;
    for (auto w : k) h = (h ^ w) * 1099511628211ull;
    return h;
  }
};

constexpr std::size_t kMemoCap = 2'000'000;

std::int64_t choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Cliques are generated on the fly: least uncovered vertex u, then larger
// uncovered common neighbours in increasing id order. That visits the
// cliques through u in lexicographic order, so the first packing found is
// the lexicographically least one.
class Search {
 public:
  Search(const MultipartiteGraph& g, int p, bool balanced, int cap, std::uint64_t budget)
      : g_(g), p_(p), balanced_(balanced), cap_(cap), budget_(budget) {
    const int r = g.r();
    // index set -> slot, via bitmask over classes
    slot_.assign(std::size_t{1} << std::min(r, 20), -1);
    if (balanced_) {
      int next = 0;
      for (std::uint32_t m = 0; m < slot_.size(); ++m)
        if (std::popcount(m) == p) slot_[m] = next++;
      counts_.assign(next, 0);
    }
    uncovered_ = g.empty_set();
    uncovered_.set_range(0, g.num_vertices());
  }

  int run() { return dfs(); }
  std::uint64_t nodes() const { return nodes_; }
  CliquePacking packing() const { return {chosen_}; }

 private:
  std::vector<std::uint64_t> key() const {
    std::vector<std::uint64_t> k = uncovered_.words();
    if (balanced_)
      for (int c : counts_) k.push_back(static_cast<std::uint64_t>(c));
    return k;
  }

  // every uncovered vertex still needs uncovered neighbours in p-1 classes
  bool lookahead() const {
    if (p_ == 1) return true;
    bool ok = true;
    uncovered_.for_each([&](std::size_t w) {
      if (!ok) return;
      int classes = 0;
      for (int c = 0; c < g_.r() && classes < p_ - 1; ++c)
        if (c != g_.class_of(static_cast<int>(w)) && g_.neighbors(static_cast<int>(w)).intersects(uncovered_ & g_.class_mask(c)))
          ++classes;
      ok = classes >= p_ - 1;
    });
    return ok;
  }

  int extend(Clique& cur, std::uint32_t mask, const Bitset& cand) {
    if (static_cast<int>(cur.size()) == p_) {
      if (balanced_ && counts_[slot_[mask]] >= cap_) return 0;
      for (int v : cur) uncovered_.reset(v);
      if (balanced_) ++counts_[slot_[mask]];
      chosen_.push_back(cur);
      int r = dfs();
      if (r == 1) return 1;
      chosen_.pop_back();
      if (balanced_) --counts_[slot_[mask]];
      for (int v : cur) uncovered_.set(v);
      return r;
    }
    for (std::size_t w = cand.first(); w < cand.size(); w = cand.next(w + 1)) {
      int c = g_.class_of(static_cast<int>(w));
      if (mask >> c & 1u) continue;
      Bitset next = cand & g_.neighbors(static_cast<int>(w));
      // keep only ids above w so each clique is produced once
      for (std::size_t x = next.first(); x <= w && x < next.size(); x = next.next(x + 1)) next.reset(x);
      cur.push_back(static_cast<int>(w));
      int r = extend(cur, mask | (1u << c), next);
      cur.pop_back();
      if (r != 0) return r;
    }
    return 0;
  }

  int dfs() {
    if (++nodes_ > budget_) return -1;
    std::size_t u = uncovered_.first();
    if (u >= uncovered_.size()) return 1;
    auto k = key();
    if (failed_.count(k)) return 0;
    if (!lookahead()) {
      remember(std::move(k));
      return 0;
    }
    Clique cur{static_cast<int>(u)};
    Bitset cand = uncovered_ & g_.neighbors(static_cast<int>(u));
    int r = extend(cur, 1u << g_.class_of(static_cast<int>(u)), cand);
    if (r == 0) remember(std::move(k));
    return r;
  }

  void remember(std::vector<std::uint64_t> k) {
    if (failed_.size() < kMemoCap) failed_.insert(std::move(k));
  }

  const MultipartiteGraph& g_;
  int p_;
  bool balanced_;
  int cap_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<int> slot_, counts_;
  std::vector<Clique> chosen_;
  Bitset uncovered_;
  std::unordered_set<std::vector<std::uint64_t>, KeyHash> failed_;
};

}  // namespace

ExactSearchResult exact_balanced_clique_packing(const MultipartiteGraph& g, int p, bool require_balanced,
                                                std::uint64_t budget) {
  if (p < 1 || p > g.r()) throw PreconditionError("need 1 <= p <= r");
  if (g.r() > 20) throw PreconditionError("exact search supports at most 20 classes");
  ExactSearchResult res;
  const int n = g.num_vertices();
  if (n == 0) {
    res.packing = CliquePacking{};
    res.completed = true;
    return res;
  }
  int cap = 0;
  if (require_balanced) {
    if (!g.equal_class_sizes()) throw PreconditionError("balanced search needs equal class sizes");
    if (n % p != 0 || (n / p) % choose(g.r(), p) != 0) {
      res.completed = true;
      return res;
    }
    cap = static_cast<int>(n / p / choose(g.r(), p));
  } else if (n % p != 0) {
    res.completed = true;
    return res;
  }
  Search s(g, p, require_balanced, cap, budget);
  int verdict = s.run();
  res.nodes = s.nodes();
  res.completed = verdict >= 0;
  if (verdict == 1) {
    res.packing = s.packing();
    std::sort(res.packing->cliques.begin(), res.packing->cliques.end());
  }
  return res;
}

}  // namespace kpack
