#pragma once

#include <vector>

#include "json.hpp"
#include "rsh/models.hpp"
#include "rsh/spectra.hpp"
#include "rsh/types.hpp"

namespace rsh {

// The coupling resolved into system-level blocks: block(a, b) is the operator
// <E^S_a| H_int |E^S_b> acting on the A register (it commutes with everything
// on B by construction).
struct InteractionBlocks {
    Index n_levels = 0;
    Index n_a = 0;
    std::vector<Operator> blocks;  // row-major over (a, b)
    Operator h_dia;                // tr_A(block) / N_A
    RealMatrix h_ab;               // mean |element| per block, A site basis
    double h_max = 0.0;            // max of h_ab (the coupling scale h)
    double h_d = 0.0;              // max |h_dia|
    RealVector q_alpha;            // sum over b != a of |E_a - E_b|^-2

    const Operator& block(Index a, Index b) const {
        return blocks[static_cast<std::size_t>(a * n_levels + b)];
    }
};

InteractionBlocks interaction_blocks(const HamiltonianSet& hs, const Spectrum& sys_basis);
// Same decomposition from a bare coupling operator on S(x)A; lets callers skip
// assembling a full HamiltonianSet when only the blocks are needed.
InteractionBlocks interaction_blocks(const Operator& h_int, Index n_s, Index n_a,
                                     const Spectrum& sys_basis);

// Mean reduced A-state over the listed environment eigenstates; the window
// averages below are traces against this.
Operator mean_a_density(const Spectrum& env_spec, const std::vector<Index>& members,
                        Index n_b);

// Block matrix element <E^E_i| block (x) 1_B |E^E_j> in the environment
// eigenbasis.
Complex env_basis_element(const Operator& block, const Spectrum& env_spec, Index n_b, Index i,
                          Index j);

// Window-averaged diagonal expectation of a block; EmptyWindowError when the
// window has no members (the average is undefined).
Complex env_average(const Operator& block, const EnvWindow& window, const Spectrum& env_spec,
                    Index n_b);

// Which level's window the pair (a, b) averages over: the lower-energy member
// of the pair; a itself on the diagonal.
Index gamma_rule(Index alpha, Index beta, double e_alpha, double e_beta);

struct HisResult {
    Operator op_site;    // self-energy correction in the S site basis, Hermitized
    Operator avg_table;  // raw averages <H_int,ab>_gamma in the given basis
    double asymmetry;    // max |table - table^dag| before Hermitization
};

// Assembles the level-pair average table in the given system basis using
// gamma_rule windows of [e_lo, e_lo+width].  Throws EmptyWindowError naming
// the level whose window is empty.
HisResult build_his(const HamiltonianSet& hs, const Spectrum& sys_basis,
                    const Spectrum& env_spec, double e_lo, double width);

struct RenormalizedFrame {
    Operator h_s_tilde;  // corrected system Hamiltonian, site basis
    Operator h_is;       // the correction itself, site basis
    Spectrum sys_spectrum_tilde;
    Operator env_averages;  // final average table in the converged basis
    double asymmetry = 0.0;
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_trace;
    double e_lo = 0.0;  // window placement the frame was built with
    double width = 0.0;
};

// Self-consistent construction: the correction is defined in the eigenbasis
// of the corrected Hamiltonian, so iterate from the bare basis until the
// basis stops moving (max off-permutation overlap < tol).  Under-relaxation
// (factor 0.5) kicks in if the residual grows twice in a row.
// Non-convergence -> ConvergenceError carrying the residual trace.
RenormalizedFrame renormalize(const HamiltonianSet& hs, const Spectrum& env_spec, double e_lo,
                              double width, double tol = 1e-12, int max_iter = 60);

nlohmann::json frame_to_json(const RenormalizedFrame& frame);

struct MeanFieldSplit {
    std::vector<Complex> mean_field;  // per coupling term: level-averaged <J^A_l>
    Operator mf_operator;             // epsilon * sum_l mean_field_l * J^S_l, site basis
    Operator delta_hs;                // h_is - mf_operator (beyond-mean-field remainder)
    Operator per_level;               // n_levels x n_terms table of <J^A_l>_gamma
};

// Splits the frame's correction into a mean-field part and a remainder;
// h_s + mf_operator + delta_hs reconstructs h_s_tilde exactly.
MeanFieldSplit mean_field_split(const RenormalizedFrame& frame, const ModelSpec& spec,
                                const Spectrum& env_spec);

// One tabulated environment-diagonal element of the residual coupling.
struct DiagonalEntry {
    Index alpha = 0, beta = 0;  // level pair, renormalized basis
    Index i = 0;                // environment eigenstate
    bool in_alpha_window = false;
    bool in_beta_window = false;
    Complex bare;    // (H_int,ab)_ii in the renormalized basis
    Complex renorm;  // bare minus the frame's correction element
};

// Tabulates (residual coupling)_ii for every level pair over the union of the
// pair's windows — the case-split table behind the suppression check.
std::vector<DiagonalEntry> renormalized_diagonal_elements(const RenormalizedFrame& frame,
                                                          const HamiltonianSet& hs,
                                                          const Spectrum& env_spec);

}  // namespace rsh
