#include "kpack/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "kpack/errors.hpp"

namespace kpack {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw InternalError("lattice arithmetic overflow");
  return r;
}
std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw InternalError("lattice arithmetic overflow");
  return r;
}

// row_a -= q * row_b
void axpy(IndexVector& a, const IndexVector& b, std::int64_t q) {
  if (q == 0) return;
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = checked_sub(a[i], checked_mul(q, b[i]));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::vector<IndexVector> hermite_basis(std::vector<IndexVector> rows, int dim) {
  std::vector<IndexVector> basis;
  std::vector<int> pivots;
  std::size_t top = 0;
  for (int c = 0; c < dim && top < rows.size(); ++c) {
    while (true) {
      std::size_t best = rows.size();
      for (std::size_t i = top; i < rows.size(); ++i)
        if (rows[i][c] != 0 && (best == rows.size() || std::llabs(rows[i][c]) < std::llabs(rows[best][c])))
          best = i;
      if (best == rows.size()) break;
      std::swap(rows[top], rows[best]);
      bool cleared = true;
      for (std::size_t i = top + 1; i < rows.size(); ++i) {
        if (rows[i][c] == 0) continue;
        axpy(rows[i], rows[top], rows[i][c] / rows[top][c]);
        if (rows[i][c] != 0) cleared = false;
      }
      if (cleared) {
        if (rows[top][c] < 0)
          for (auto& x : rows[top]) x = -x;
        pivots.push_back(c);
        ++top;
        break;
      }
    }
  }
  rows.resize(top);
  // Reduce above-pivot entries into [0, pivot).
  for (std::size_t i = 0; i < rows.size(); ++i) {
    int c = pivots[i];
    for (std::size_t above = 0; above < i; ++above)
      axpy(rows[above], rows[i], floor_div(rows[above][c], rows[i][c]));
  }
  basis = std::move(rows);
  return basis;
}

int pivot_of(const IndexVector& row) {
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i] != 0) return static_cast<int>(i);
  return -1;
}

}  // namespace

IntegerLattice::IntegerLattice(int dim, std::vector<IndexVector> generators)
    : dim_(dim), gens_(std::move(generators)) {
  for (const auto& v : gens_)
    if (static_cast<int>(v.size()) != dim_) throw PreconditionError("generator has wrong dimension");
  basis_ = hermite_basis(gens_, dim_);
}

bool IntegerLattice::contains(const IndexVector& v0) const {
  if (static_cast<int>(v0.size()) != dim_) throw PreconditionError("vector has wrong dimension");
  IndexVector v = v0;
  int col = 0;
  for (const auto& b : basis_) {
    int c = pivot_of(b);
    for (; col < c; ++col)
      if (v[col] != 0) return false;
    if (v[c] % b[c] != 0) return false;
    axpy(v, b, v[c] / b[c]);
    col = c + 1;
  }
  for (; col < dim_; ++col)
    if (v[col] != 0) return false;
  return true;
}

IntegerLattice robust_edge_lattice(const std::vector<std::vector<int>>& edges,
                                   const PartitionLabeling& q, std::int64_t mu_count) {
  if (mu_count < 0) throw PreconditionError("mu_count must be nonnegative");
  std::map<IndexVector, std::int64_t> counts;
  for (const auto& e : edges) ++counts[index_vector(e, q)];
  std::vector<IndexVector> gens;
  for (const auto& [v, c] : counts)
    if (c >= mu_count) gens.push_back(v);
  return IntegerLattice(q.d, std::move(gens));
}

CompletenessResult is_complete_wrt(const IntegerLattice& lattice, const PartitionLabeling& q,
                                   const MultipartiteGraph& g) {
  if (lattice.dim() != q.d) throw PreconditionError("lattice and partition dimensions differ");
  auto cls = part_classes(g, q);
  for (int i = 0; i < q.d; ++i)
    for (int j = i + 1; j < q.d; ++j) {
      if (cls[i] != cls[j]) continue;
      IndexVector diff(q.d, 0);
      diff[i] = 1;
      diff[j] = -1;
      if (!lattice.contains(diff)) return CompletenessResult{false, std::make_pair(i, j)};
    }
  return CompletenessResult{true, std::nullopt};
}

MinimalPartition merge_to_minimal(const std::vector<std::vector<int>>& edges,
                                  const PartitionLabeling& q0, const MultipartiteGraph& g,
                                  std::int64_t mu_count) {
  MinimalPartition out{q0, robust_edge_lattice(edges, q0, mu_count), {}};
  while (true) {
    auto cls = part_classes(g, out.q);
    std::optional<std::pair<int, int>> hit;
    for (int i = 0; i < out.q.d && !hit; ++i)
      for (int j = i + 1; j < out.q.d && !hit; ++j) {
        if (cls[i] != cls[j]) continue;
        IndexVector diff(out.q.d, 0);
        diff[i] = 1;
        diff[j] = -1;
        if (out.lattice.contains(diff)) hit = std::make_pair(i, j);
      }
    if (!hit) return out;
    auto [i, j] = *hit;
    std::vector<int> part_of = out.q.part_of;
    for (int& t : part_of) {
      if (t == j) t = i;
      else if (t > j) --t;
    }
    out.merges.push_back(*hit);
    out.q = make_labeling(g, std::move(part_of));
    out.lattice = robust_edge_lattice(edges, out.q, mu_count);
  }
}

}  // namespace kpack
