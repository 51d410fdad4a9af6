#pragma once

#include <string>

namespace spinbal {

/// Constants of the Lojasiewicz-based stabilization estimates for one
/// potential on T^n.
struct DecayCertificate {
    double L = 0.0;       ///< max |grad Q| (Lipschitz constant of Q)
    double d = 0.0;       ///< Q^ >= d dist(., Z)^Nloj
    double Nloj = 2.0;
    double Ntilde = 2.0;  ///< max(2, Nloj)
    double sigma1 = 0.0;
    double sigma2 = 0.0;
    int n = 2;            ///< torus dimension
    std::string method;   ///< how (d, Nloj) were obtained

    /// Exponent N * Ntilde of the polynomial decay bound.
    double decay_exponent() const { return Nloj * Ntilde; }
};

}  // namespace spinbal
