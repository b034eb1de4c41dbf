#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "rsh/hilbert.hpp"
#include "rsh/spectra.hpp"
#include "rsh/types.hpp"

namespace rsh {

// basis_label records which basis the rows/columns index; ops here produce
// system states in the computational ("s_site") basis.
struct DensityMatrix {
    Operator matrix;
    std::string basis_label;
};

// Enforces Hermiticity (1e-10), unit trace (1e-10), positivity (eigenvalues
// >= -1e-10).  Throws NumericError; every exported state must pass.
void check_density(const DensityMatrix& dm);

// {dim, basis, entries: row-major [re, im] pairs}
nlohmann::json density_to_json(const DensityMatrix& dm);

// Uniform mixture over the window's total eigenstates, reduced to S.
DensityMatrix microcanonical_reduced(const CompositeSpace& space, const Spectrum& total_spec,
                                     const EnergyWindow& window);

// Product-basis expansion of the window eigenstates: column k holds
// f^eta_{alpha i} = <E^S_alpha E^E_i|E_eta> at row alpha*n_env + i for the
// k-th window member.  Computed once and reused across random draws.
Operator product_expansion(const CompositeSpace& space, const Spectrum& total_spec,
                           const Spectrum& sys_spec, const Spectrum& env_spec,
                           const EnergyWindow& window);

struct TypicalStateReport {
    RealVector coefficients;  // Gaussian amplitudes C_eta (unnormalized)
    Operator expansion;       // product-basis expansion, as above
    Operator k_amps;          // K_{alpha i}: n_s x n_env product-basis amplitudes
    RealVector omega_norms;   // per system level: squared norm of row alpha of K
    double n_major = 0.0;     // mean participation ratio of the expansions
    DensityMatrix rho;        // reduced state of the random vector
};

// Random vector in the window span: real iid N(0,1) amplitudes over the
// window eigenstates, normalized, then reduced to S.
TypicalStateReport typical_vector_reduced(const CompositeSpace& space,
                                          const Spectrum& total_spec, const Spectrum& sys_spec,
                                          const Spectrum& env_spec, const EnergyWindow& window,
                                          std::uint64_t seed);

// Same draw given a precomputed expansion (bulk seed averaging reuses it).
TypicalStateReport typical_from_expansion(Operator expansion, const Spectrum& sys_spec,
                                          Index n_env, std::uint64_t seed);

// Random vector in the direct-sum space ⊕_alpha |E^S_alpha> (x) window(alpha),
// reduced to S.  Windows may overlap in environment indices.
DensityMatrix typical_vector_direct_sum(const Spectrum& sys_spec,
                                        const std::vector<EnvWindow>& windows,
                                        std::uint64_t seed);

// exp(-beta h_eff) / tr exp(-beta h_eff), via eigendecomposition with the
// extremal eigenvalue subtracted before exponentiating (overflow-safe).
DensityMatrix canonical_state(const Operator& h_eff, double beta);

// The unique beta with tr(canonical(h_eff,beta) h_eff) = tr(rho h_eff), by
// bracket expansion + bisection; residual <= 1e-10 x spectral span of h_eff.
// Target energy outside the open spectral interval -> UnfittableError.
double fit_beta(const DensityMatrix& rho, const Operator& h_eff);

// Distance-minimizing beta (reported alongside fit_beta, never the contract
// value): coarse scan around beta_hint, then golden-section refinement.
double beta_min_distance(const DensityMatrix& rho, const Operator& h_eff, double beta_hint);

// (1/2) sum |eigenvalues of a - b|; in [0, 1] for unit-trace states.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace rsh
