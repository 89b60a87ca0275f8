#include "glelab/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace glelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// quadrature head + analytic tail for integral_0^inf exp(-mu s) k(s) ds where
// k has a signed amplitude representation
double laplace_by_quadrature(const Kernel& k, double mu) {
    auto amp = detail::signed_amplitude(k);
    if (!amp) throw std::invalid_argument("laplace_transform: unsupported kernel shape");
    PiecewiseEnvelope weighted = *amp;
    for (auto& piece : weighted.pieces)
        for (auto& t : piece.terms) t.rate += mu;
    const double head_end = 50.0;
    const double head = integrate([&](double s) { return std::exp(-mu * s) * k.scalar_lag(s); },
                                  0.0, head_end, 1e-12);
    const TailEval tail = envelope_tail(weighted, head_end);
    if (tail.divergent) throw DivergenceError("laplace_transform: integral diverges");
    return head + tail.value;
}

}  // namespace

double laplace_transform(const Kernel& k, double mu) {
    if (k.dim() != 1 || !k.translation_invariant())
        throw std::invalid_argument("laplace_transform: scalar translation-invariant kernels only");
    if (const auto* ex = std::get_if<ExponentialKernel>(&k.node())) {
        if (ex->c == 0.0) return 0.0;
        if (!(mu > -ex->beta)) throw DivergenceError("laplace_transform: mu <= -beta");
        return ex->c / (ex->beta + mu);
    }
    if (const auto* pl = std::get_if<PowerLawKernel>(&k.node())) {
        if (pl->c == 0.0) return 0.0;
        if (mu < 0.0) throw DivergenceError("laplace_transform: power-law kernel with mu < 0");
        if (mu == 0.0) {
            if (!(pl->beta > 1.0)) throw DivergenceError("laplace_transform: beta <= 1 at mu = 0");
            return pl->c * std::pow(pl->alpha, 1.0 - pl->beta) / (pl->beta - 1.0);
        }
        return laplace_by_quadrature(k, mu);
    }
    return laplace_by_quadrature(k, mu);
}

double laplace_transform(const WeightFunction& h, double mu) {
    if (const auto* e = std::get_if<ExponentialWeight>(&h.form())) {
        if (!(mu > -e->rate)) throw DivergenceError("laplace_transform: mu <= -rate");
        return 1.0 / (e->rate + mu);
    }
    const auto& p = std::get<PowerLawWeight>(h.form());
    if (mu < 0.0) throw DivergenceError("laplace_transform: power-law weight with mu < 0");
    if (mu == 0.0) {
        if (!(p.beta > 1.0)) throw DivergenceError("laplace_transform: weight not integrable");
        return std::pow(p.alpha, 1.0 - p.beta) / (p.beta - 1.0);
    }
    const double head_end = 50.0;
    const double head =
        integrate([&](double s) { return std::exp(-mu * s) * h(s); }, 0.0, head_end, 1e-12);
    EnvTerm t;
    t.pows = {{p.alpha, -p.beta}};
    t.rate = mu;
    const TailEval tail = term_tail(t, head_end, kInf);
    if (tail.divergent) throw DivergenceError("laplace_transform: integral diverges");
    return head + tail.value;
}

// --- envelopes ---------------------------------------------------------------

namespace detail {

namespace {

PiecewiseEnvelope single_piece(Envelope terms, double valid_from = 0.0) {
    PiecewiseEnvelope e;
    e.pieces.push_back({kInf, std::move(terms)});
    e.valid_from = valid_from;
    return e;
}

EnvTerm power_term(double coef, double shift, double power) {
    EnvTerm t;
    t.coef = coef;
    if (power != 0.0) t.pows = {{shift, power}};
    return t;
}

EnvTerm exp_term(double coef, double rate) {
    EnvTerm t;
    t.coef = coef;
    t.rate = rate;
    return t;
}

PiecewiseEnvelope square_piecewise(const PiecewiseEnvelope& e) {
    PiecewiseEnvelope out;
    out.valid_from = e.valid_from;
    for (const auto& piece : e.pieces)
        out.pieces.push_back({piece.end, envelope_mul(piece.terms, piece.terms)});
    return out;
}

// refines two piecewise envelopes onto a common set of boundaries and applies
// fn(termsA, termsB) on each piece
template <typename F>
PiecewiseEnvelope combine(const PiecewiseEnvelope& a, const PiecewiseEnvelope& b, F&& fn) {
    std::vector<double> ends;
    for (const auto& p : a.pieces) ends.push_back(p.end);
    for (const auto& p : b.pieces) ends.push_back(p.end);
    std::sort(ends.begin(), ends.end());
    ends.erase(std::unique(ends.begin(), ends.end()), ends.end());
    auto terms_at = [](const PiecewiseEnvelope& e, double end) -> const Envelope& {
        for (const auto& p : e.pieces)
            if (end <= p.end) return p.terms;
        return e.pieces.back().terms;
    };
    PiecewiseEnvelope out;
    out.valid_from = std::max(a.valid_from, b.valid_from);
    for (double end : ends) out.pieces.push_back({end, fn(terms_at(a, end), terms_at(b, end))});
    return out;
}

}  // namespace

std::optional<PiecewiseEnvelope> signed_amplitude(const Kernel& k) {
    if (k.dim() != 1 || !k.translation_invariant()) return std::nullopt;
    if (const auto* pl = std::get_if<PowerLawKernel>(&k.node()))
        return single_piece({power_term(pl->c, pl->alpha, -pl->beta)});
    if (const auto* ex = std::get_if<ExponentialKernel>(&k.node()))
        return single_piece({exp_term(ex->c, ex->beta)});
    const auto& p = std::get<PerturbedKernel>(k.node());
    const auto base = signed_amplitude(*p.base);
    if (!base) return std::nullopt;
    switch (p.family) {
        case PerturbFamily::Translation:
            if (const auto* pl = std::get_if<PowerLawKernel>(&p.base->node()))
                return single_piece({power_term(pl->c, pl->alpha + p.alpha, -pl->beta)});
            else {
                const auto& ex = std::get<ExponentialKernel>(p.base->node());
                return single_piece({exp_term(ex.c, ex.beta + p.alpha)});
            }
        case PerturbFamily::Dilation:
            if (const auto* pl = std::get_if<PowerLawKernel>(&p.base->node()))
                return single_piece({power_term(pl->c, pl->alpha, -(pl->beta + p.alpha))});
            else {
                const auto& ex = std::get<ExponentialKernel>(p.base->node());
                return single_piece({exp_term(ex.c * std::exp(-ex.beta * p.alpha), ex.beta)});
            }
        case PerturbFamily::Cutoff: {
            PiecewiseEnvelope e;
            e.pieces.push_back({p.alpha, base->pieces.front().terms});
            e.pieces.push_back({kInf, {}});
            return e;
        }
        case PerturbFamily::Oscillation: {
            Envelope terms = base->pieces.front().terms;
            for (auto& t : terms) {
                t.trig = Trig::Cos;
                t.freq = p.alpha;
            }
            return single_piece(std::move(terms));
        }
    }
    return std::nullopt;
}

std::optional<PiecewiseEnvelope> opnorm_sq_envelope(const Kernel& k) {
    if (!k.translation_invariant()) return std::nullopt;
    if (k.dim() == 1) {
        const auto amp = signed_amplitude(k);
        if (!amp) return std::nullopt;
        return square_piecewise(*amp);
    }
    if (const auto* m = std::get_if<MatrixExpKernel>(&k.node()))
        return single_piece({exp_term(1.0, 2.0 * m->min_rate())});
    const auto& p = std::get<PerturbedKernel>(k.node());
    const auto* base = std::get_if<MatrixExpKernel>(&p.base->node());
    if (!base) return std::nullopt;
    const double lmin = base->min_rate();
    switch (p.family) {
        case PerturbFamily::Translation:
            return single_piece({exp_term(1.0, 2.0 * (lmin + p.alpha))});
        case PerturbFamily::Dilation:
            return single_piece({exp_term(std::exp(-2.0 * lmin * p.alpha), 2.0 * lmin)});
        case PerturbFamily::Cutoff: {
            PiecewiseEnvelope e;
            e.pieces.push_back({p.alpha, {exp_term(1.0, 2.0 * lmin)}});
            e.pieces.push_back({kInf, {}});
            return e;
        }
        case PerturbFamily::Oscillation: {
            EnvTerm t = exp_term(1.0, 2.0 * lmin);
            t.trig = Trig::Cos;
            t.freq = p.alpha;
            return single_piece(envelope_mul({t}, {t}));
        }
    }
    return std::nullopt;
}

namespace {

bool same_matrix_exp(const MatrixExpKernel& a, const MatrixExpKernel& b) {
    if (a.q.rows() != b.q.rows() || a.rates != b.rates) return false;
    for (int i = 0; i < a.q.rows(); ++i)
        for (int j = 0; j < a.q.cols(); ++j)
            if (a.q(i, j) != b.q(i, j)) return false;
    return true;
}

// ||K - K~||^2 for a matrix-exponential base and its perturbation
std::optional<PiecewiseEnvelope> matrix_diff_envelope(const MatrixExpKernel& base,
                                                      const PerturbedKernel& pert) {
    const double lmin = base.min_rate();
    const double a = pert.alpha;
    switch (pert.family) {
        case PerturbFamily::Translation: {
            // components e^{-l u}(1 - e^{-a u}); the slowest rate dominates at
            // every lag because the oscillatory factor is shared
            if (a == 0.0) return single_piece({});
            Envelope sq = {exp_term(1.0, 2.0 * lmin), exp_term(-2.0, 2.0 * lmin + a),
                           exp_term(1.0, 2.0 * lmin + 2.0 * a)};
            return single_piece(std::move(sq));
        }
        case PerturbFamily::Dilation: {
            // components e^{-l u}(1 - e^{-l a}); slowest rate dominates beyond
            // the pairwise crossovers
            if (a == 0.0) return single_piece({});
            const double m0 = 1.0 - std::exp(-lmin * a);
            double valid_from = 0.0;
            for (double l : base.rates) {
                if (l == lmin) continue;
                const double m = 1.0 - std::exp(-l * a);
                valid_from = std::max(valid_from, std::log(m / m0) / (l - lmin));
            }
            return single_piece({exp_term(m0 * m0, 2.0 * lmin)}, valid_from);
        }
        case PerturbFamily::Cutoff: {
            PiecewiseEnvelope e;
            e.pieces.push_back({a, {}});
            e.pieces.push_back({kInf, {exp_term(1.0, 2.0 * lmin)}});
            return e;
        }
        case PerturbFamily::Oscillation: {
            if (a == 0.0) return single_piece({});
            // e^{-2 lmin u} (1 - cos(a u))^2
            EnvTerm one = exp_term(1.0, lmin);
            EnvTerm cos_t = exp_term(-1.0, lmin);
            cos_t.trig = Trig::Cos;
            cos_t.freq = a;
            const Envelope diff = {one, cos_t};
            return single_piece(envelope_mul(diff, diff));
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<PiecewiseEnvelope> opnorm_sq_envelope_diff(const Kernel& k1, const Kernel& k2) {
    if (k1.dim() != k2.dim()) return std::nullopt;
    if (k1.dim() == 1) {
        const auto a1 = signed_amplitude(k1);
        const auto a2 = signed_amplitude(k2);
        if (!a1 || !a2) return std::nullopt;
        const PiecewiseEnvelope diff = combine(
            *a1, *a2,
            [](const Envelope& ta, const Envelope& tb) { return envelope_sum(ta, envelope_scaled(tb, -1.0)); });
        return square_piecewise(diff);
    }
    const auto* m1 = std::get_if<MatrixExpKernel>(&k1.node());
    const auto* p2 = std::get_if<PerturbedKernel>(&k2.node());
    if (!m1 && !p2) return std::nullopt;
    if (m1 && p2) {
        const auto* base = std::get_if<MatrixExpKernel>(&p2->base->node());
        if (base && same_matrix_exp(*m1, *base)) return matrix_diff_envelope(*base, *p2);
        return std::nullopt;
    }
    // symmetric order
    return opnorm_sq_envelope_diff(k2, k1);
}

PiecewiseEnvelope divide_by_weight(PiecewiseEnvelope env, const WeightFunction& h) {
    if (const auto* p = std::get_if<PowerLawWeight>(&h.form())) {
        for (auto& piece : env.pieces)
            for (auto& t : piece.terms) {
                Envelope prod = envelope_mul({t}, {power_term(1.0, p->alpha, p->beta)});
                t = prod.front();
            }
    } else {
        const double rate = std::get<ExponentialWeight>(h.form()).rate;
        for (auto& piece : env.pieces)
            for (auto& t : piece.terms) t.rate -= rate;
    }
    return env;
}

}  // namespace detail

// --- schur norm --------------------------------------------------------------

namespace {

NormResult schur_from_lag_samples(const Kernel& k, const WeightFunction& h, const TimeGrid& grid,
                                  const std::optional<PiecewiseEnvelope>& env_sq) {
    NormResult out;
    GridFunction g(grid);
    for (int i = 0; i < grid.size(); ++i) {
        const double u = grid.t(i);
        const double a = k.opnorm_lag(u);
        g[i] = a * a / h(u);
    }
    out.head = trapezoid(g);
    const double t_final = grid.horizon();
    if (env_sq && t_final >= env_sq->valid_from) {
        const PiecewiseEnvelope weighted = detail::divide_by_weight(*env_sq, h);
        const TailEval tail = envelope_tail(weighted, t_final);
        if (tail.divergent) {
            out.warnings.push_back("weighted tail integral diverges: " + tail.note);
        } else {
            out.tail = tail.value;
            out.tail_bound = tail.bound;
            if (tail.bound >= 1e-6 * std::max(out.head + out.tail, 1e-300))
                out.warnings.push_back("tail remainder bound exceeds 1e-6 of the integral");
        }
    } else {
        out.warnings.push_back("no analytic tail available; norm truncated at the grid horizon");
        // growth diagnostic: compare the last tenth of the partial sums
        const int i9 = (9 * grid.n_steps) / 10;
        GridFunction g9 = g;
        g9.values.resize(static_cast<size_t>(i9) + 1);
        g9.grid = TimeGrid(grid.dt, i9);
        const double head9 = trapezoid(g9);
        if (out.head - head9 > 0.05 * std::max(out.head, 1e-300))
            out.warnings.push_back("partial sums still growing at the horizon; integral may diverge");
    }
    out.value = std::sqrt(std::max(0.0, out.head + out.tail));
    return out;
}

NormResult schur_two_time(const std::function<Mat(double, double)>& eval, const WeightFunction& h,
                          const TimeGrid& grid) {
    NormResult out;
    const double dt = grid.dt;
    double sup = 0.0;
    std::vector<double> row(static_cast<size_t>(grid.size()));
    for (int i = 1; i < grid.size(); ++i) {
        const double t = grid.t(i);
        for (int j = 0; j <= i; ++j) {
            const double a = operator_norm(eval(t, grid.t(j)));
            row[static_cast<size_t>(j)] = a * a / h(t - grid.t(j));
        }
        double s = 0.5 * (row[0] + row[static_cast<size_t>(i)]);
        for (int j = 1; j < i; ++j) s += row[static_cast<size_t>(j)];
        sup = std::max(sup, s * dt);
    }
    out.head = sup;
    out.value = std::sqrt(sup);
    out.warnings.push_back("two-time kernel: supremum restricted to grid times");
    return out;
}

}  // namespace

NormResult schur_norm(const Kernel& k, const WeightFunction& h, const TimeGrid& grid) {
    if (k.translation_invariant())
        return schur_from_lag_samples(k, h, grid, detail::opnorm_sq_envelope(k));
    const auto& tt = std::get<TwoTimeKernel>(k.node());
    return schur_two_time(tt.evaluator, h, grid);
}

NormResult schur_norm_diff(const Kernel& k1, const Kernel& k2, const WeightFunction& h,
                           const TimeGrid& grid) {
    if (k1.dim() != k2.dim()) throw std::invalid_argument("schur_norm_diff: dimension mismatch");
    if (k1.translation_invariant() && k2.translation_invariant()) {
        NormResult out;
        GridFunction g(grid);
        for (int i = 0; i < grid.size(); ++i) {
            const double u = grid.t(i);
            const double a =
                (k1.dim() == 1) ? std::abs(k1.scalar_lag(u) - k2.scalar_lag(u))
                                : operator_norm(k1.evaluate(u, 0.0) - k2.evaluate(u, 0.0));
            g[i] = a * a / h(u);
        }
        out.head = trapezoid(g);
        const auto env = detail::opnorm_sq_envelope_diff(k1, k2);
        const double t_final = grid.horizon();
        if (env && t_final >= env->valid_from) {
            const PiecewiseEnvelope weighted = detail::divide_by_weight(*env, h);
            const TailEval tail = envelope_tail(weighted, t_final);
            if (tail.divergent) {
                out.warnings.push_back("weighted tail integral diverges: " + tail.note);
            } else {
                out.tail = tail.value;
                out.tail_bound = tail.bound;
                if (tail.bound >= 1e-6 * std::max(out.head + out.tail, 1e-300))
                    out.warnings.push_back("tail remainder bound exceeds 1e-6 of the integral");
            }
        } else {
            out.warnings.push_back("no analytic tail available; norm truncated at the grid horizon");
        }
        out.value = std::sqrt(std::max(0.0, out.head + out.tail));
        return out;
    }
    return schur_two_time(
        [&k1, &k2](double t, double s) { return k1.evaluate(t, s) - k2.evaluate(t, s); }, h, grid);
}

// --- M_h and the weighted sup norm -------------------------------------------

MhResult mh_constant(const WeightFunction& h, const TimeGrid& grid) {
    MhResult out;
    const int n = grid.size();
    std::vector<double> hv(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) hv[static_cast<size_t>(i)] = h(grid.t(i));
    // trapezoid self-convolution
    std::vector<double> conv(static_cast<size_t>(n), 0.0);
    for (int i = 1; i < n; ++i) {
        double s = 0.5 * (hv[0] * hv[static_cast<size_t>(i)] + hv[static_cast<size_t>(i)] * hv[0]);
        for (int j = 1; j < i; ++j)
            s += hv[static_cast<size_t>(j)] * hv[static_cast<size_t>(i - j)];
        conv[static_cast<size_t>(i)] = s * grid.dt;
    }
    double ratio_last = 0.0, ratio_90 = 0.0;
    const int i90 = (9 * grid.n_steps) / 10;
    for (int i = 1; i < n; ++i) {
        const double r = conv[static_cast<size_t>(i)] / hv[static_cast<size_t>(i)];
        out.grid_max = std::max(out.grid_max, r);
        if (i == i90) ratio_90 = r;
        if (i == n - 1) ratio_last = r;
    }
    out.value = out.grid_max;
    try {
        out.limit = 2.0 * laplace_transform(h, 0.0);
        out.limit_finite = true;
    } catch (const DivergenceError&) {
        out.limit_finite = false;
    }
    const bool subexponential =
        std::holds_alternative<PowerLawWeight>(h.form()) && out.limit_finite;
    if (subexponential) {
        out.value = std::max(out.value, out.limit);
    } else if (ratio_last > ratio_90 * 1.01) {
        out.warnings.push_back(
            "convolution ratio still increasing at the horizon; weight is not subexponential");
    }
    return out;
}

double weighted_sup_norm(const GridFunction& f, const WeightFunction& h) {
    const MhResult mh = mh_constant(h, f.grid);
    double sup = 0.0;
    for (int i = 0; i < f.size(); ++i) sup = std::max(sup, std::abs(f[i]) / h(f.grid.t(i)));
    return mh.value * sup;
}

// --- decay-class diagnostic ---------------------------------------------------

SubexpReport subexponential_diagnostic(const WeightFunction& h, const TimeGrid& grid, double tol) {
    SubexpReport rep;
    const int n = grid.size();
    std::vector<double> hv(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) hv[static_cast<size_t>(i)] = h(grid.t(i));
    auto conv_at = [&](int i) {
        double s = hv[0] * hv[static_cast<size_t>(i)];
        for (int j = 1; j < i; ++j)
            s += hv[static_cast<size_t>(j)] * hv[static_cast<size_t>(i - j)];
        return s * grid.dt;
    };
    rep.conv_ratio_origin = conv_at(1) / hv[1];
    rep.conv_ratio_horizon = conv_at(grid.n_steps) / hv[static_cast<size_t>(grid.n_steps)];
    const double ratio_90 = conv_at((9 * grid.n_steps) / 10) / hv[static_cast<size_t>((9 * grid.n_steps) / 10)];

    try {
        rep.conv_ratio_limit = 2.0 * laplace_transform(h, h.mu());
        rep.limit_finite = true;
    } catch (const DivergenceError& e) {
        rep.limit_finite = false;
        rep.notes.push_back(std::string("transform divergent: ") + e.what());
    }

    const double scale = rep.limit_finite ? std::max(1.0, rep.conv_ratio_limit) : 1.0;
    rep.origin_ok = rep.conv_ratio_origin <= tol * scale;
    if (rep.limit_finite) {
        rep.horizon_ok =
            std::abs(rep.conv_ratio_horizon - rep.conv_ratio_limit) <= tol * rep.conv_ratio_limit;
    } else {
        rep.horizon_ok = false;
    }
    if (!rep.limit_finite || rep.conv_ratio_horizon > ratio_90 * (1.0 + tol / 5.0)) {
        if (!rep.horizon_ok) rep.divergent = !rep.limit_finite;
        if (rep.conv_ratio_horizon > ratio_90 * 1.01)
            rep.notes.push_back("convolution ratio still growing at the horizon");
    }

    // shift neutrality over a short window at the horizon
    rep.shift_window = std::min(1.0, grid.horizon() / 10.0);
    const int m = std::max(1, static_cast<int>(rep.shift_window / grid.dt));
    const double ht = hv[static_cast<size_t>(grid.n_steps)];
    double dev = 0.0;
    for (int j = 0; j <= m; ++j) {
        const double s = grid.t(j);
        const double expected = std::exp(-h.mu() * s);
        dev = std::max(dev, std::abs(hv[static_cast<size_t>(grid.n_steps - j)] / ht - expected) /
                                expected);
    }
    rep.shift_max_dev = dev;
    rep.shift_ok = dev <= tol;
    return rep;
}

// --- contraction conditions ---------------------------------------------------

const char* to_string(ConditionTag tag) {
    switch (tag) {
        case ConditionTag::FirstOrderMoment: return "first_order_moment";
        case ConditionTag::FirstOrderError: return "first_order_error";
        case ConditionTag::SecondOrderMoment: return "second_order_moment";
        case ConditionTag::SecondOrderError: return "second_order_error";
    }
    return "unknown";
}

ConditionCheck check_condition(ConditionTag tag, const ConditionParams& p) {
    ConditionCheck c;
    if (!p.h_hat_finite) return c;  // not checkable
    c.checkable = true;
    switch (tag) {
        case ConditionTag::FirstOrderMoment:
            c.lhs = p.mu + 2.0 * p.gamma;
            c.rhs = 2.0 * p.schur * std::sqrt(p.h_hat_mu);
            break;
        case ConditionTag::FirstOrderError:
            c.lhs = p.mu + 2.0 * p.gamma;
            c.rhs = 2.0 * p.schur * std::sqrt(2.0 * p.h_hat_mu);
            break;
        case ConditionTag::SecondOrderMoment:
            c.lhs = p.mu + 2.0 * p.gamma * p.lambda;
            c.rhs = 2.0 * std::sqrt(2.0 * p.schur * p.schur * p.h_hat_mu);
            break;
        case ConditionTag::SecondOrderError:
            c.lhs = p.mu + 2.0 * p.gamma * p.lambda;
            c.rhs = 4.0 * std::sqrt(p.schur * p.schur * p.h_hat_mu);
            break;
    }
    c.holds = c.lhs > c.rhs;
    return c;
}

ConditionCheck check_condition(ConditionTag tag, const Kernel& k, const WeightFunction& h,
                               const TimeGrid& grid, double gamma, double lambda) {
    ConditionParams p;
    p.gamma = gamma;
    p.lambda = lambda;
    p.mu = h.mu();
    p.schur = schur_norm(k, h, grid).value;
    try {
        p.h_hat_mu = laplace_transform(h, p.mu);
        p.h_hat_finite = true;
    } catch (const DivergenceError&) {
        p.h_hat_finite = false;
    }
    return check_condition(tag, p);
}

}  // namespace glelab
