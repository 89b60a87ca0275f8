#pragma once

// Analytic tails for improper integrals of structured integrands.
//
// An Envelope is a sum of terms coef * prod_i (u + a_i)^(q_i) * exp(-rate*u)
// * trig(freq*u). Every built-in kernel family, its perturbations, and their
// pairwise differences have squared norms of this shape, so the norm
// integrals can be truncated at the grid horizon and finished in closed form
// (or by an integration-by-parts series with a tracked remainder bound).

#include <string>
#include <utility>
#include <vector>

namespace glelab {

enum class Trig { One, Cos, Sin };

struct EnvTerm {
    double coef = 1.0;
    std::vector<std::pair<double, double>> pows;  // (shift, exponent), exponent != 0
    double rate = 0.0;                            // exp(-rate * u)
    double freq = 0.0;                            // argument scale of trig
    Trig trig = Trig::One;
};

using Envelope = std::vector<EnvTerm>;

/// Product of two terms; trig products split into sums, so up to two terms.
std::vector<EnvTerm> term_mul(const EnvTerm& a, const EnvTerm& b);

Envelope envelope_mul(const Envelope& a, const Envelope& b);
Envelope envelope_scaled(Envelope e, double s);
Envelope envelope_sum(Envelope a, const Envelope& b);

/// Pointwise evaluation (for cross-checking against quadrature).
double envelope_eval(const Envelope& e, double u);

/// Envelope restricted to consecutive intervals; `end` of the last piece is
/// +infinity. Terms are only trusted for u >= valid_from.
struct EnvPiece {
    double end = 0.0;
    Envelope terms;
};
struct PiecewiseEnvelope {
    std::vector<EnvPiece> pieces;
    double valid_from = 0.0;
};

struct TailEval {
    double value = 0.0;
    double bound = 0.0;  // rigorous-ish remainder estimate, 0 when exact
    bool divergent = false;
    std::string note;
};

/// integral_{from}^{to} of a single term ("to" may be +infinity).
TailEval term_tail(const EnvTerm& term, double from, double to);

/// integral_{from}^{infinity} over all pieces that intersect [from, inf).
TailEval envelope_tail(const PiecewiseEnvelope& env, double from);

}  // namespace glelab
