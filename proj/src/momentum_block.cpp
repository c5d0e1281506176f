#include "polaron/momentum_block.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polaron/rng.hpp"

namespace polaron {

namespace {

// Dense occupation vector indexed by d + L/2, plus cached total.
struct DenseConfig {
  std::vector<int> occ;
  int total = 0;
};

DenseConfig to_dense(const PhononConfig& cfg, int ring) {
  DenseConfig d;
  d.occ.assign(ring, 0);
  const int half = ring / 2;
  for (const auto& [disp, cnt] : cfg.occ) {
    d.occ[disp + half] = cnt;
    d.total += cnt;
  }
  return d;
}

std::string key_of(const std::vector<int>& occ) {
  std::string key(occ.size(), '\0');
  for (std::size_t i = 0; i < occ.size(); ++i)
    key[i] = static_cast<char>(occ[i]);
  return key;
}

// Width of the minimal contiguous ring window covering all occupied sites.
int cloud_width(const std::vector<int>& occ) {
  const int ring = static_cast<int>(occ.size());
  std::vector<int> pos;
  for (int i = 0; i < ring; ++i)
    if (occ[i] > 0) pos.push_back(i);
  if (pos.empty()) return 0;
  int max_gap = pos.front() + ring - pos.back();
  for (std::size_t i = 1; i < pos.size(); ++i)
    max_gap = std::max(max_gap, pos[i] - pos[i - 1]);
  return ring - max_gap + 1;
}

// Pattern as seen from the electron after it hops by `delta`:
// out[e] = occ[(e + delta) mod ring].
std::vector<int> shifted(const std::vector<int>& occ, int delta) {
  const int ring = static_cast<int>(occ.size());
  std::vector<int> out(ring);
  for (int e = 0; e < ring; ++e)
    out[e] = occ[((e + delta) % ring + ring) % ring];
  return out;
}

}  // namespace

HamiltonianTerms::HamiltonianTerms(const BasisSpec& spec, int ring_size)
    : spec_(spec), ring_(ring_size), configs_(build_basis(spec, ring_size)) {
  const int half = ring_ / 2;
  std::unordered_map<std::string, std::int32_t> index;
  std::vector<DenseConfig> dense;
  dense.reserve(configs_.size());
  for (std::size_t i = 0; i < configs_.size(); ++i) {
    dense.push_back(to_dense(configs_[i], ring_));
    index.emplace(key_of(dense.back().occ), static_cast<std::int32_t>(i));
  }

  auto lookup = [&](const std::vector<int>& occ) -> std::int32_t {
    auto it = index.find(key_of(occ));
    return it == index.end() ? -1 : it->second;
  };

  // Emits row <- col with the given amplitude; targets that violate the
  // (M, N) truncation are projected out by the failed lookup.
  auto push = [&](const std::vector<int>& target, std::int32_t col, double amp,
                  int phase, Coeff coeff) {
    if (amp == 0.0) return;
    const std::int32_t row = lookup(target);
    if (row < 0) return;
    terms_.push_back(Term{row, col, amp, static_cast<std::int8_t>(phase),
                          coeff});
  };

  for (std::int32_t c = 0; c < static_cast<std::int32_t>(configs_.size());
       ++c) {
    const auto& n = dense[c].occ;
    const int total = dense[c].total;

    if (total > 0)
      terms_.push_back(Term{c, c, static_cast<double>(total), 0,
                            Coeff::PhononEnergy});

    // Bare hopping: the cloud pattern re-references to the new electron site.
    push(shifted(n, +1), c, 1.0, -1, Coeff::Hop);
    push(shifted(n, -1), c, 1.0, +1, Coeff::Hop);

    auto with_delta = [&](int d, int change) {
      std::vector<int> out = n;
      out[((d + half) % ring_ + ring_) % ring_] += change;
      return out;
    };
    auto count_at = [&](int d) {
      return n[((d + half) % ring_ + ring_) % ring_];
    };

    // On-site coupling: create/destroy a quantum at the electron site.
    {
      std::vector<int> up = with_delta(0, +1);
      if (dense[c].total + 1 <= spec_.max_phonons &&
          cloud_width(up) <= spec_.cloud_extent)
        push(up, c, std::sqrt(count_at(0) + 1.0), 0, Coeff::Holstein);
      if (count_at(0) > 0)
        push(with_delta(0, -1), c, std::sqrt(count_at(0)), 0, Coeff::Holstein);
    }

    // Bond coupling: hopping correlated with lattice motion on the bond.
    // Hop to the right (phase -1) couples to sites 0 and +1 of the departure
    // frame; hop to the left (phase +1) couples to sites -1 and 0.
    struct BondOp {
      int hop_delta;
      int site;
      double sign;
      int phase;
    };
    const BondOp ops[] = {
        {+1, 0, +1.0, -1}, {+1, +1, -1.0, -1},
        {-1, -1, +1.0, +1}, {-1, 0, -1.0, +1}};
    for (const auto& op : ops) {
      std::vector<int> up = with_delta(op.site, +1);
      if (total + 1 <= spec_.max_phonons &&
          cloud_width(up) <= spec_.cloud_extent)
        push(shifted(up, op.hop_delta), c,
             op.sign * std::sqrt(count_at(op.site) + 1.0), op.phase,
             Coeff::Ssh);
      if (count_at(op.site) > 0)
        push(shifted(with_delta(op.site, -1), op.hop_delta), c,
             op.sign * std::sqrt(count_at(op.site)), op.phase, Coeff::Ssh);
    }
  }
}

SparseMatrixC HamiltonianTerms::matrix(const ModelParams& p, double k) const {
  p.validate();
  if ((p.alpha_ssh > 0.0 || p.alpha_h > 0.0) && spec_.max_phonons >= 1 &&
      spec_.cloud_extent == 0)
    throw std::invalid_argument(
        "HamiltonianTerms: cloud_extent must be >= 1 for a coupled model "
        "with max_phonons >= 1");
  if (p.ring_size != ring_)
    throw std::invalid_argument("HamiltonianTerms: ring size mismatch");

  auto coeff_value = [&](Coeff c) {
    switch (c) {
      case Coeff::Hop: return -p.t;
      case Coeff::PhononEnergy: return p.omega;
      case Coeff::Ssh: return p.alpha_ssh;
      case Coeff::Holstein: return p.alpha_h;
    }
    return 0.0;
  };
  const Complex phase_fwd = std::polar(1.0, -k);
  const Complex phase_bwd = std::polar(1.0, +k);

  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(terms_.size());
  for (const auto& t : terms_) {
    const double cv = coeff_value(t.coeff);
    if (cv == 0.0) continue;
    Complex value = cv * t.amp;
    if (t.phase == -1)
      value *= phase_fwd;
    else if (t.phase == +1)
      value *= phase_bwd;
    triplets.emplace_back(t.row, t.col, value);
  }

  SparseMatrixC h(dim(), dim());
  h.setFromTriplets(triplets.begin(), triplets.end());
  h.makeCompressed();
  return h;
}

MomentumBlock::MomentumBlock(const HamiltonianTerms& terms,
                             const ModelParams& p, double k)
    : h_(terms.matrix(p, k)), k_(k) {}

namespace {

inline Complex row_dot(const SparseMatrixC& h, int row,
                       const Eigen::VectorXcd& in) {
  const auto* outer = h.outerIndexPtr();
  const auto* inner = h.innerIndexPtr();
  const auto* vals = h.valuePtr();
  Complex sum(0.0, 0.0);
  for (auto p = outer[row]; p < outer[row + 1]; ++p)
    sum += vals[p] * in[inner[p]];
  return sum;
}

}  // namespace

void MomentumBlock::apply_serial(const Eigen::VectorXcd& in,
                                 Eigen::VectorXcd& out) const {
  const int n = dim();
  out.resize(n);
  for (int i = 0; i < n; ++i) out[i] = row_dot(h_, i, in);
}

void MomentumBlock::apply_parallel(const Eigen::VectorXcd& in,
                                   Eigen::VectorXcd& out) const {
  const int n = dim();
  out.resize(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) out[i] = row_dot(h_, i, in);
}

void MomentumBlock::apply(const Eigen::VectorXcd& in,
                          Eigen::VectorXcd& out) const {
  if (dim() >= 4096)
    apply_parallel(in, out);
  else
    apply_serial(in, out);
}

double hermiticity_defect(const MomentumBlock& block, int trials,
                          std::uint64_t seed) {
  Rng rng(seed);
  const int n = block.dim();
  Eigen::VectorXcd u(n), v(n), hu(n), hv(n);
  double worst = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    for (int i = 0; i < n; ++i) {
      u[i] = Complex(rng.normal(), rng.normal());
      v[i] = Complex(rng.normal(), rng.normal());
    }
    block.apply(u, hu);
    block.apply(v, hv);
    const Complex a = u.dot(hv);           // <u, H v>
    const Complex b = std::conj(v.dot(hu));  // conj(<v, H u>)
    worst = std::max(worst, std::abs(a - b) / (u.norm() * v.norm()));
  }
  return worst;
}

}  // namespace polaron
