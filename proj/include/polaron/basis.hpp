#pragma once

#include <utility>
#include <vector>

namespace polaron {

// Variational truncation of the phonon cloud: every occupied site must fit in
// a contiguous ring window of width <= cloud_extent, carrying at most
// max_phonons quanta in total. (0, *) or (*, 0) leaves only the vacuum.
struct BasisSpec {
  int cloud_extent = 0;  // M
  int max_phonons = 0;   // N
};

// Phonon occupations keyed by displacement from the electron,
// d in [-L/2, L/2). Entries are sorted by displacement with counts >= 1;
// an empty list is the zero-phonon vacuum.
struct PhononConfig {
  std::vector<std::pair<int, int>> occ;

  int total() const {
    int n = 0;
    for (const auto& [d, c] : occ) n += c;
    return n;
  }
};

// All configurations allowed by `spec` on a ring of `ring_size` sites, in a
// canonical order: ascending total phonon count, then lexicographic on the
// (displacement, count) list. The vacuum is always element 0.
std::vector<PhononConfig> build_basis(const BasisSpec& spec, int ring_size);

}  // namespace polaron
