#include "qftlab/conventions.hpp"

namespace qftlab {

nlohmann::ordered_json conventions() {
  nlohmann::ordered_json c;
  c["retarded_green"] = "(box + m^2) Delta_R = -delta, supp Delta_R in t >= |x|";
  c["pauli_jordan"] = "Delta = Delta_R - Delta_A";
  c["dyson_mean"] = "Delta_D = (Delta_R + Delta_A)/2";
  c["symplectic_form"] = "sigma(w1, w2) = a sum (phi1 pi2 - pi1 phi2) = f1.Delta.f2";
  c["weyl_product"] = "W(w1) W(w2) = exp(-i sigma(w1, w2)/2) W(w1 + w2)";
  c["normal_form"] = "S(F) = exp(i theta) W(wave f), theta = c - (1/2) f.Delta_D.f";
  c["sites"] = "x_n = (n - N/2) a";
  c["embedding"] = "z_k = sqrt(a/2) (w^{1/2} phi^_k + i w^{-1/2} pi^_k), Im<z1, z2> = sigma/2";
  c["inner_product"] = "antilinear in the first slot";
  c["time_evolution"] = "U(t, s) z_k = exp(i (w_k t - k s a)) z_k";
  c["massless_regulator"] = "mu = 1e-3/a unless given";
  c["information"] = "Im <P i log Delta Phi, Phi> in nats, Phi_perp = Phi (one-particle level)";
  return c;
}

}  // namespace qftlab
