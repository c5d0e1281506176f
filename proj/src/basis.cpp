#include "polaron/basis.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace polaron {

namespace {

// Dense occupation key over displacement indices 0..L-1 (index = d + L/2).
std::string dense_key(const std::vector<int>& occ) {
  std::string key(occ.size(), '\0');
  for (std::size_t i = 0; i < occ.size(); ++i)
    key[i] = static_cast<char>(occ[i]);
  return key;
}

void collect_window_patterns(int start, int width, int max_total, int ring,
                             std::unordered_set<std::string>& seen,
                             std::vector<PhononConfig>& out) {
  // Slot 0 and slot width-1 must stay occupied so each pattern is generated
  // from a window matching its exact extent; duplicates from wrap-around
  // degeneracies are caught by the `seen` set.
  const int half = ring / 2;
  auto emit = [&](const std::vector<int>& c) {
    std::vector<int> dense(ring, 0);
    for (int i = 0; i < width; ++i) {
      if (c[i] == 0) continue;
      int d = start + i;
      while (d >= half) d -= ring;
      while (d < -half) d += ring;
      dense[d + half] = c[i];
    }
    auto key = dense_key(dense);
    if (!seen.insert(std::move(key)).second) return;
    PhononConfig cfg;
    for (int idx = 0; idx < ring; ++idx)
      if (dense[idx] > 0) cfg.occ.emplace_back(idx - half, dense[idx]);
    out.push_back(std::move(cfg));
  };

  std::vector<int> c(width, 0);
  auto rec = [&](auto&& self, int slot, int used) -> void {
    if (slot == width) {
      if (c[0] >= 1 && c[width - 1] >= 1) emit(c);
      return;
    }
    const int lo = (slot == 0 || slot == width - 1) ? 1 : 0;
    for (int v = lo; used + v <= max_total; ++v) {
      c[slot] = v;
      self(self, slot + 1, used + v);
    }
    c[slot] = 0;
  };
  rec(rec, 0, 0);
}

}  // namespace

std::vector<PhononConfig> build_basis(const BasisSpec& spec, int ring_size) {
  if (ring_size < 4 || ring_size % 2 != 0)
    throw std::invalid_argument("build_basis: ring_size must be even and >= 4");
  if (spec.cloud_extent < 0 || spec.max_phonons < 0)
    throw std::invalid_argument("build_basis: negative basis parameters");
  if (spec.cloud_extent > ring_size)
    throw std::invalid_argument(
        "build_basis: cloud_extent exceeds ring_size");
  if (spec.max_phonons > 200)
    throw std::invalid_argument("build_basis: max_phonons too large");

  std::vector<PhononConfig> configs;
  configs.push_back(PhononConfig{});  // vacuum

  if (spec.cloud_extent >= 1 && spec.max_phonons >= 1) {
    std::unordered_set<std::string> seen;
    const int half = ring_size / 2;
    for (int start = -half; start < half; ++start)
      for (int width = 1; width <= spec.cloud_extent; ++width)
        collect_window_patterns(start, width, spec.max_phonons, ring_size,
                                seen, configs);
  }

  std::sort(configs.begin(), configs.end(),
            [](const PhononConfig& a, const PhononConfig& b) {
              const int ta = a.total(), tb = b.total();
              if (ta != tb) return ta < tb;
              return a.occ < b.occ;
            });
  return configs;
}

}  // namespace polaron
