#pragma once

#include <string>

#include "json.hpp"

namespace polaron {

// Physical Hamiltonian parameters for one electron coupled to dispersionless
// phonons on a ring of L sites. Energies are in units of the hopping t
// (t = 1 in every shipped config).
struct ModelParams {
  double t = 1.0;          // electron hopping amplitude
  double omega = 1.0;      // phonon frequency
  double alpha_ssh = 0.0;  // bond coupling (hopping modulated by lattice motion)
  double alpha_h = 0.0;    // on-site coupling (local energy modulated)
  int ring_size = 32;      // L, even, >= 4

  void validate() const;
  bool pure_ssh() const { return alpha_h == 0.0 && alpha_ssh > 0.0; }
  bool pure_holstein() const { return alpha_ssh == 0.0 && alpha_h > 0.0; }
};

// Dimensionless couplings plus the adiabaticity ratio omega / (4 t).
struct CouplingPoint {
  double lambda_ssh = 0.0;
  double lambda_h = 0.0;
  double adiabaticity = 0.0;
};

// lambda_ssh = 2 a_ssh^2 / (omega t), lambda_h = a_h^2 / (2 omega t).
// Throws std::domain_error at t = 0: the atomic limit has no dimensionless
// form, evaluate it through the solver directly.
CouplingPoint to_dimensionless(const ModelParams& p);

ModelParams from_dimensionless(const CouplingPoint& c, double t, double omega,
                               int ring_size);

// Canonical on-disk form is dimensionless:
// {"t": f, "omega": f, "lambda_ssh": f, "lambda_h": f, "ring_size": int}
nlohmann::json params_to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

}  // namespace polaron
