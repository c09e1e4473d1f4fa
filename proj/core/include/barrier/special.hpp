#pragma once

#include <complex>

namespace barrier {

using cplx = std::complex<double>;

/// Principal branch of ln Γ(z), continuous along rays away from the poles.
cplx lgamma(cplx z);
cplx gamma(cplx z);

/// Polygamma ψ^{(m)}(z); m = 0 is the digamma function.
cplx polygamma(int m, cplx z);

/// Γ^{(k)}(z) from Γ and the polygamma functions (Γ' = Γψ and Leibniz's rule).
cplx gamma_derivative(int k, cplx z);

/// z^a on ℂ∖]−∞,0], real positive on ]0,∞[. Throws on the cut or at 0.
cplx principal_pow(cplx z, cplx a);

}  // namespace barrier
