#include "rsh/models.hpp"

#include <cmath>

#include "rsh/errors.hpp"
#include "rsh/rng.hpp"
#include "rsh/spectra.hpp"

namespace rsh {

namespace {

// Keeps multi-spin S registers non-degenerate: per-spin fields scale by
// successive powers of a ratio below 1/2, so the splittings form a
// superincreasing sequence and no two +/- level sums can collide.
constexpr double kFieldRatio = 0.45;

// Disorder draws use their own stream so other consumers of the model seed
// (state sampling, sweeps) never shift the realized chain.
constexpr std::uint64_t kDisorderStream = 1;

// Chain site k of an n-site register occupies bit n-1-k of the flat index
// (site 0 is the leftmost Kronecker factor); bit value 0 means spin up.
struct BitChain {
    int n;
    explicit BitChain(Index n_sites) : n(static_cast<int>(n_sites)) {}
    Index dim() const { return Index(1) << n; }
    Index mask(int k) const { return Index(1) << (n - 1 - k); }
    double zval(Index s, int k) const { return (s & mask(k)) ? -1.0 : 1.0; }
};

void add_z(RealMatrix& h, const BitChain& c, double v, int k) {
    if (v == 0.0) return;
    for (Index s = 0; s < c.dim(); ++s) h(s, s) += v * c.zval(s, k);
}

void add_x(RealMatrix& h, const BitChain& c, double v, int k) {
    if (v == 0.0) return;
    for (Index s = 0; s < c.dim(); ++s) h(s ^ c.mask(k), s) += v;
}

void add_zz(RealMatrix& h, const BitChain& c, double v, int k, int l) {
    if (v == 0.0) return;
    for (Index s = 0; s < c.dim(); ++s) h(s, s) += v * c.zval(s, k) * c.zval(s, l);
}

// xx + yy exchange: hops between anti-aligned pairs with amplitude 2v.
void add_flipflop(RealMatrix& h, const BitChain& c, double v, int k, int l) {
    if (v == 0.0) return;
    const Index both = c.mask(k) | c.mask(l);
    for (Index s = 0; s < c.dim(); ++s) {
        const bool bk = (s & c.mask(k)) != 0;
        const bool bl = (s & c.mask(l)) != 0;
        if (bk != bl) h(s ^ both, s) += 2.0 * v;
    }
}

// Dense embedding of a 2x2 operator at one site of a small register.
Operator register_site(const Operator& op2, Index site, Index n_sites) {
    Operator out = Operator::Identity(1, 1);
    for (Index k = 0; k < n_sites; ++k)
        out = kron(out, k == site ? op2 : Operator(Operator::Identity(2, 2)));
    return out;
}

}  // namespace

Operator system_matrix(const ModelSpec& spec) {
    const Operator sz = site_operator("sz");
    Operator h = Operator::Zero(spec.dim_s(), spec.dim_s());
    double coeff = 0.5 * spec.system_field;
    for (Index k = 0; k < spec.n_spins_s; ++k) {
        h += coeff * register_site(sz, k, spec.n_spins_s);
        coeff *= kFieldRatio;
    }
    return h;
}

Operator interaction_matrix(const ModelSpec& spec) {
    const Index dim_sa = spec.dim_s() * spec.dim_a();
    Operator h = Operator::Zero(dim_sa, dim_sa);
    for (const auto& [label_s, label_a] : spec.interaction_terms) {
        const Operator js = register_site(site_operator(label_s), spec.n_spins_s - 1,
                                          spec.n_spins_s);
        const Operator ja = register_site(site_operator(label_a), 0, spec.n_spins_a);
        h += kron(js, ja);
    }
    h *= spec.epsilon;
    if (hermiticity_defect(h) > 1e-12 * std::max(1.0, max_abs(h)))
        throw ConfigError("interaction terms do not assemble to a Hermitian operator");
    return h;
}

Operator interaction_sys_term(const ModelSpec& spec, std::size_t l) {
    if (l >= spec.interaction_terms.size())
        throw RangeError("interaction term index out of range");
    return register_site(site_operator(spec.interaction_terms[l].first), spec.n_spins_s - 1,
                         spec.n_spins_s);
}

Operator interaction_env_term(const ModelSpec& spec, std::size_t l) {
    if (l >= spec.interaction_terms.size())
        throw RangeError("interaction term index out of range");
    return register_site(site_operator(spec.interaction_terms[l].second), 0, spec.n_spins_a);
}

void apply_chaotic_preset(ModelSpec& spec) {
    spec.env_couplings = {1.0, 1.0, 0.6, 0.6};
    spec.env_fields = {0.2, 0.4};
    spec.disorder_width = 0.4;
}

void apply_integrable_preset(ModelSpec& spec) {
    spec.env_couplings = {1.0, 0.5, 0.0, 0.0};
    spec.env_fields = {0.2, 0.0};
    spec.disorder_width = 8.0;
}

Operator site_operator(const std::string& label) {
    Operator op(2, 2);
    if (label == "sx")
        op << 0, 1, 1, 0;
    else if (label == "sy")
        op << 0, Complex(0, -1), Complex(0, 1), 0;
    else if (label == "sz")
        op << 1, 0, 0, -1;
    else if (label == "sp")
        op << 0, 1, 0, 0;
    else if (label == "sm")
        op << 0, 0, 1, 0;
    else if (label == "n")
        op << 1, 0, 0, 0;
    else if (label == "id")
        op << 1, 0, 0, 1;
    else
        throw ConfigError("unknown operator label '" + label + "'");
    return op;
}

void validate(const ModelSpec& spec) {
    if (spec.n_spins_s < 1 || spec.n_spins_a < 1 || spec.n_spins_b < 1)
        throw ConfigError("model: every register needs at least one spin");
    if (spec.epsilon < 0.0) throw ConfigError("model: epsilon must be non-negative");
    if (spec.disorder_width < 0.0)
        throw ConfigError("model: disorder_width must be non-negative");
    for (const auto& [label_s, label_a] : spec.interaction_terms) {
        site_operator(label_s);
        site_operator(label_a);
    }
}

RealMatrix env_matrix_real(const ModelSpec& spec) {
    const BitChain chain(spec.n_chain());
    const int n = chain.n;
    RealMatrix h = RealMatrix::Zero(chain.dim(), chain.dim());

    for (int k = 0; k + 1 < n; ++k) {
        add_flipflop(h, chain, spec.env_couplings.j_xx, k, k + 1);
        add_zz(h, chain, spec.env_couplings.j_zz, k, k + 1);
    }
    for (int k = 0; k + 2 < n; ++k) {
        add_flipflop(h, chain, spec.env_couplings.j2_xx, k, k + 2);
        add_zz(h, chain, spec.env_couplings.j2_zz, k, k + 2);
    }

    Rng rng(split_seed(spec.seed, kDisorderStream));
    for (int k = 0; k < n; ++k) {
        const double dz = rng.uniform_symmetric(spec.disorder_width);
        const double dx = rng.uniform_symmetric(spec.disorder_width);
        add_z(h, chain, spec.env_fields.hz + dz, k);
        add_x(h, chain, spec.env_fields.hx + dx, k);
    }
    return h;
}

HamiltonianSet build_model(const ModelSpec& spec, Index dim_cap) {
    validate(spec);
    if (spec.dim_total() > dim_cap)
        throw ResourceError("model: total dimension " + std::to_string(spec.dim_total()) +
                            " exceeds cap " + std::to_string(dim_cap));

    HamiltonianSet set{CompositeSpace(spec.dim_s(), spec.dim_a(), spec.dim_b()),
                       system_matrix(spec),
                       env_matrix_real(spec).cast<Complex>(),
                       interaction_matrix(spec)};

    const RealVector sys_levels = eigenvalues_only(set.h_s);
    for (Index k = 1; k < sys_levels.size(); ++k)
        if (sys_levels(k) - sys_levels(k - 1) < 1e-10)
            throw DegeneracyError("model: S-register gap below 1e-10 between levels " +
                                  std::to_string(k - 1) + " and " + std::to_string(k));
    return set;
}

Operator HamiltonianSet::assemble_total() const {
    Operator h = embed(space, h_env, Factor::AB);
    h += embed(space, h_s, Factor::S);
    h += embed(space, h_int, Factor::SA);
    return h;
}

RealMatrix HamiltonianSet::assemble_total_real() const {
    if (max_imag(h_s) != 0.0 || max_imag(h_env) != 0.0 || max_imag(h_int) != 0.0)
        throw UnsupportedFormError("assemble_total_real: parts have imaginary entries");

    const Index ns = space.n_s, na = space.n_a, nb = space.n_b;
    const Index ne = na * nb, nt = space.n_tot();
    RealMatrix h = RealMatrix::Zero(nt, nt);

    for (Index s = 0; s < ns; ++s) {
        h.block(s * ne, s * ne, ne, ne) = h_env.real();
        for (Index sp = 0; sp < ns; ++sp) {
            const double hs_el = h_s(s, sp).real();
            if (hs_el != 0.0) h.block(s * ne, sp * ne, ne, ne).diagonal().array() += hs_el;
        }
    }
    for (Index s = 0; s < ns; ++s)
        for (Index a = 0; a < na; ++a)
            for (Index sp = 0; sp < ns; ++sp)
                for (Index ap = 0; ap < na; ++ap) {
                    const double v = h_int(s * na + a, sp * na + ap).real();
                    if (v == 0.0) continue;
                    h.block((s * na + a) * nb, (sp * na + ap) * nb, nb, nb)
                        .diagonal()
                        .array() += v;
                }
    return h;
}

RealMatrix assemble_total_real(const ModelSpec& spec, Index dim_cap) {
    // Builds straight from the spec so no complex copy of the chain ever
    // exists; needed headroom at the 2^14 ceiling.
    validate(spec);
    if (spec.dim_total() > dim_cap)
        throw ResourceError("model: total dimension " + std::to_string(spec.dim_total()) +
                            " exceeds cap " + std::to_string(dim_cap));

    const Index ns = spec.dim_s(), na = spec.dim_a(), nb = spec.dim_b();
    const Index ne = na * nb, nt = spec.dim_total();

    const Operator h_s = system_matrix(spec);
    const Operator h_int = interaction_matrix(spec);
    if (max_imag(h_s) != 0.0 || max_imag(h_int) != 0.0)
        throw UnsupportedFormError("assemble_total_real: parts have imaginary entries");

    RealMatrix h = RealMatrix::Zero(nt, nt);
    {
        const RealMatrix env = env_matrix_real(spec);
        for (Index s = 0; s < ns; ++s) h.block(s * ne, s * ne, ne, ne) = env;
    }
    for (Index s = 0; s < ns; ++s)
        for (Index sp = 0; sp < ns; ++sp) {
            const double hs_el = h_s(s, sp).real();
            if (hs_el != 0.0) h.block(s * ne, sp * ne, ne, ne).diagonal().array() += hs_el;
        }
    for (Index s = 0; s < ns; ++s)
        for (Index a = 0; a < na; ++a)
            for (Index sp = 0; sp < ns; ++sp)
                for (Index ap = 0; ap < na; ++ap) {
                    const double v = h_int(s * na + a, sp * na + ap).real();
                    if (v == 0.0) continue;
                    h.block((s * na + a) * nb, (sp * na + ap) * nb, nb, nb)
                        .diagonal()
                        .array() += v;
                }
    return h;
}

double spectral_span(const HamiltonianSet& hs) {
    RealVector values;
    if (max_imag(hs.h_s) == 0.0 && max_imag(hs.h_env) == 0.0 && max_imag(hs.h_int) == 0.0)
        values = eigenvalues_only(hs.assemble_total_real());
    else
        values = eigenvalues_only(hs.assemble_total());
    const double span = values(values.size() - 1) - values(0);
    if (!(span > 0.0)) throw DegeneracyError("spectral_span: total spectrum has zero spread");
    return span;
}

}  // namespace rsh
