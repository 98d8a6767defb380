#include "ptdelta/coupling.hpp"

#include <cmath>

#include "ptdelta/errors.hpp"

namespace ptdelta {

double coupling_gamma(Complex psi_sys_at_x0, Complex psi_env_at_x0, double Gamma) {
  const double env = std::abs(psi_env_at_x0);
  if (env <= 1e-12) {
    throw DomainError("coupling_gamma: environment amplitude vanishes at x0");
  }
  return Gamma * std::abs(psi_sys_at_x0) / env;
}

Complex effective_env_potential(Complex psi_sys_at_x0, Complex psi_env_at_x0, double V,
                                double Gamma) {
  const double env = std::abs(psi_env_at_x0);
  if (env <= 1e-12) {
    throw DomainError("effective_env_potential: environment amplitude vanishes at x0");
  }
  const double ratio2 = std::norm(psi_sys_at_x0) / (env * env);
  return {V, -Gamma * ratio2};
}

}  // namespace ptdelta
