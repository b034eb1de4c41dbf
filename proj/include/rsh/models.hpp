#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rsh/hilbert.hpp"
#include "rsh/types.hpp"

namespace rsh {

// Largest total dimension the dense pipeline will accept (2^14).
inline constexpr Index kDefaultDimCap = 1 << 14;

struct EnvCouplings {
    double j_xx = 1.0;   // nearest-neighbor (xx + yy) exchange
    double j_zz = 1.0;   // nearest-neighbor zz exchange
    double j2_xx = 0.6;  // next-nearest (xx + yy) exchange
    double j2_zz = 0.6;  // next-nearest zz exchange
};

struct EnvFields {
    double hz = 0.2;  // uniform longitudinal field
    double hx = 0.4;  // uniform transverse field
};

// Defines an S + A + B spin-1/2 model: a small system register S coupled with
// strength epsilon to the first site of a disordered chain A ∪ B.  Site 0 of
// the chain belongs to A; B is the chain remainder and never appears in the
// coupling.
struct ModelSpec {
    Index n_spins_s = 1;
    Index n_spins_a = 1;
    Index n_spins_b = 7;

    double epsilon = 0.05;      // overall coupling strength
    double system_field = 1.0;  // S-register splitting scale

    // Coupling terms (system label, chain label); the system operator acts on
    // the last S spin, the chain operator on chain site 0.  The assembled sum
    // must be Hermitian.
    std::vector<std::pair<std::string, std::string>> interaction_terms = {{"sx", "n"}};

    EnvCouplings env_couplings;
    EnvFields env_fields;
    double disorder_width = 0.4;  // half-width of uniform per-site field noise
    std::uint64_t seed = 1;

    Index n_chain() const { return n_spins_a + n_spins_b; }
    Index dim_s() const { return Index(1) << n_spins_s; }
    Index dim_a() const { return Index(1) << n_spins_a; }
    Index dim_b() const { return Index(1) << n_spins_b; }
    Index dim_env() const { return Index(1) << n_chain(); }
    Index dim_total() const { return Index(1) << (n_spins_s + n_chain()); }
};

// Coupling/field presets keeping everything else in the spec untouched.
// Chaotic: next-nearest exchange plus tilted random fields (GOE-like bulk
// statistics).  Integrable: nearest-neighbor XXZ in a strong random
// longitudinal field, no transverse component (Poisson-like statistics).
void apply_chaotic_preset(ModelSpec& spec);
void apply_integrable_preset(ModelSpec& spec);

// 2x2 single-site operator for a label in {sx, sy, sz, sp, sm, n, id};
// n = diag(1, 0).  Unknown label -> ConfigError.
Operator site_operator(const std::string& label);

struct HamiltonianSet {
    CompositeSpace space;  // dims (2^n_s, 2^n_a, 2^n_b)
    Operator h_s;          // on S
    Operator h_env;        // on A (x) B
    Operator h_int;        // on S (x) A, includes the factor epsilon

    // Total Hamiltonian embed(h_s) + embed(h_int) + embed(h_env), materialized
    // on demand: storing it eagerly would double peak memory at the largest
    // supported dimension.
    Operator assemble_total() const;

    // Real assembly for the large-dimension eigensolver path; requires every
    // part to be exactly real (UnsupportedFormError otherwise).
    RealMatrix assemble_total_real() const;
};

void validate(const ModelSpec& spec);

// Builds the three Hamiltonians.  Throws ResourceError when dim_total()
// exceeds dim_cap, DegeneracyError when the S register has a spectral gap
// below 1e-10, ConfigError for bad labels or a non-Hermitian coupling sum.
// Identical specs (including seed) produce bitwise-identical operators.
HamiltonianSet build_model(const ModelSpec& spec, Index dim_cap = kDefaultDimCap);

// Chain Hamiltonian on A ∪ B as a real dense matrix (the chain uses only
// real-valued couplings).  Same disorder stream as build_model.
RealMatrix env_matrix_real(const ModelSpec& spec);

// The l-th coupling term's factors as operators on the full S / A registers
// (without the epsilon prefactor); the mean-field split needs them.
Operator interaction_sys_term(const ModelSpec& spec, std::size_t l);
Operator interaction_env_term(const ModelSpec& spec, std::size_t l);

// The standalone S-register and S(x)A coupling Hamiltonians (the latter
// includes epsilon); building blocks for memory-lean large-size paths.
Operator system_matrix(const ModelSpec& spec);
Operator interaction_matrix(const ModelSpec& spec);

// Real total Hamiltonian straight from the spec, skipping the complex
// intermediates of HamiltonianSet; memory-lean path for the largest runs.
RealMatrix assemble_total_real(const ModelSpec& spec, Index dim_cap = kDefaultDimCap);

// Full spread E_max - E_min of the total spectrum (exact, eigenvalues only).
double spectral_span(const HamiltonianSet& hs);

}  // namespace rsh
