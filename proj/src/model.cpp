#include "polaron/model.hpp"

#include <cmath>
#include <stdexcept>

namespace polaron {

void ModelParams::validate() const {
  if (!(t >= 0.0)) throw std::invalid_argument("ModelParams: t must be >= 0");
  if (!(omega > 0.0)) throw std::invalid_argument("ModelParams: omega must be > 0");
  if (!(alpha_ssh >= 0.0))
    throw std::invalid_argument("ModelParams: alpha_ssh must be >= 0");
  if (!(alpha_h >= 0.0))
    throw std::invalid_argument("ModelParams: alpha_h must be >= 0");
  if (ring_size < 4 || ring_size % 2 != 0)
    throw std::invalid_argument("ModelParams: ring_size must be even and >= 4");
}

CouplingPoint to_dimensionless(const ModelParams& p) {
  p.validate();
  if (p.t == 0.0)
    throw std::domain_error(
        "to_dimensionless: t = 0 has no dimensionless form; evaluate the "
        "atomic limit through the solver directly");
  CouplingPoint c;
  c.lambda_ssh = 2.0 * p.alpha_ssh * p.alpha_ssh / (p.omega * p.t);
  c.lambda_h = p.alpha_h * p.alpha_h / (2.0 * p.omega * p.t);
  c.adiabaticity = p.omega / (4.0 * p.t);
  return c;
}

ModelParams from_dimensionless(const CouplingPoint& c, double t, double omega,
                               int ring_size) {
  if (!(t > 0.0)) throw std::domain_error("from_dimensionless: t must be > 0");
  if (!(omega > 0.0))
    throw std::domain_error("from_dimensionless: omega must be > 0");
  if (c.lambda_ssh < 0.0 || c.lambda_h < 0.0)
    throw std::domain_error("from_dimensionless: negative coupling");
  ModelParams p;
  p.t = t;
  p.omega = omega;
  p.ring_size = ring_size;
  p.alpha_ssh = std::sqrt(c.lambda_ssh * omega * t / 2.0);
  p.alpha_h = std::sqrt(2.0 * c.lambda_h * omega * t);
  p.validate();
  return p;
}

nlohmann::json params_to_json(const ModelParams& p) {
  const CouplingPoint c = to_dimensionless(p);
  return nlohmann::json{{"t", p.t},
                        {"omega", p.omega},
                        {"lambda_ssh", c.lambda_ssh},
                        {"lambda_h", c.lambda_h},
                        {"ring_size", p.ring_size}};
}

ModelParams params_from_json(const nlohmann::json& j) {
  CouplingPoint c;
  c.lambda_ssh = j.value("lambda_ssh", 0.0);
  c.lambda_h = j.value("lambda_h", 0.0);
  return from_dimensionless(c, j.value("t", 1.0), j.at("omega").get<double>(),
                            j.value("ring_size", 32));
}

}  // namespace polaron
