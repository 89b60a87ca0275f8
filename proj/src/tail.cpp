#include "glelab/tail.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace glelab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void merge_pow(std::vector<std::pair<double, double>>& pows, double shift, double q) {
    if (q == 0.0) return;
    for (auto& p : pows) {
        if (p.first == shift) {
            p.second += q;
            if (p.second == 0.0) {
                p.first = pows.back().first;
                p.second = pows.back().second;
                pows.pop_back();
            }
            return;
        }
    }
    pows.emplace_back(shift, q);
}

EnvTerm base_product(const EnvTerm& a, const EnvTerm& b) {
    EnvTerm t;
    t.coef = a.coef * b.coef;
    t.pows = a.pows;
    for (const auto& p : b.pows) merge_pow(t.pows, p.first, p.second);
    t.rate = a.rate + b.rate;
    return t;
}

}  // namespace

std::vector<EnvTerm> term_mul(const EnvTerm& a, const EnvTerm& b) {
    EnvTerm base = base_product(a, b);
    std::vector<EnvTerm> out;
    auto push = [&](double scale, Trig trig, double freq) {
        EnvTerm t = base;
        t.coef *= scale;
        if (freq < 0.0) {
            freq = -freq;
            if (trig == Trig::Sin) t.coef = -t.coef;
        }
        if (freq == 0.0) {
            if (trig == Trig::Sin) return;  // sin(0) = 0
            trig = Trig::One;
        }
        t.trig = trig;
        t.freq = (trig == Trig::One) ? 0.0 : freq;
        if (t.coef != 0.0) out.push_back(std::move(t));
    };

    const Trig ta = a.trig, tb = b.trig;
    if (ta == Trig::One && tb == Trig::One) {
        push(1.0, Trig::One, 0.0);
    } else if (ta == Trig::One || tb == Trig::One) {
        const EnvTerm& osc = (ta == Trig::One) ? b : a;
        push(1.0, osc.trig, osc.freq);
    } else if (ta == Trig::Cos && tb == Trig::Cos) {
        push(0.5, Trig::Cos, a.freq - b.freq);
        push(0.5, Trig::Cos, a.freq + b.freq);
    } else if (ta == Trig::Sin && tb == Trig::Sin) {
        push(0.5, Trig::Cos, a.freq - b.freq);
        push(-0.5, Trig::Cos, a.freq + b.freq);
    } else {
        // sin * cos
        const double fs = (ta == Trig::Sin) ? a.freq : b.freq;
        const double fc = (ta == Trig::Sin) ? b.freq : a.freq;
        push(0.5, Trig::Sin, fs + fc);
        push(0.5, Trig::Sin, fs - fc);
    }
    return out;
}

Envelope envelope_mul(const Envelope& a, const Envelope& b) {
    Envelope out;
    for (const auto& ta : a)
        for (const auto& tb : b) {
            auto prod = term_mul(ta, tb);
            out.insert(out.end(), prod.begin(), prod.end());
        }
    return out;
}

Envelope envelope_scaled(Envelope e, double s) {
    for (auto& t : e) t.coef *= s;
    return e;
}

Envelope envelope_sum(Envelope a, const Envelope& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

double envelope_eval(const Envelope& e, double u) {
    double s = 0.0;
    for (const auto& t : e) {
        double v = t.coef;
        for (const auto& p : t.pows) v *= std::pow(u + p.first, p.second);
        if (t.rate != 0.0) v *= std::exp(-t.rate * u);
        if (t.trig == Trig::Cos) v *= std::cos(t.freq * u);
        else if (t.trig == Trig::Sin) v *= std::sin(t.freq * u);
        s += v;
    }
    return s;
}

namespace {

struct SingleShift {
    double coef = 0.0;
    double shift = 0.0;
    double power = 0.0;
};

// Rewrites prod_i (u+a_i)^(q_i) as a truncated series sum_j c_j (u+a*)^(Q-j),
// expanding every non-pivot factor around the pivot shift a* (the largest
// shift, so all binomial ratios |a_i - a*|/(T + a*) stay below 1 for T > 0).
// Appends a remainder estimate at u = from to *bound.
std::vector<SingleShift> reduce_to_single_shift(const EnvTerm& term, double from, double* bound,
                                                bool* ok) {
    *ok = true;
    std::vector<SingleShift> out;
    if (term.pows.empty()) {
        out.push_back({term.coef, 0.0, 0.0});
        return out;
    }
    double pivot = term.pows.front().first;
    for (const auto& p : term.pows) pivot = std::max(pivot, p.first);
    if (!(from + pivot > 0.0)) {
        *ok = false;
        return out;
    }

    constexpr int kMaxJ = 120;
    std::vector<double> coeff = {1.0};
    double q_total = 0.0;
    double worst_ratio = 0.0;
    for (const auto& [a, q] : term.pows) {
        q_total += q;
        if (a == pivot) continue;
        const double delta = a - pivot;
        const double ratio = std::abs(delta) / (from + pivot);
        worst_ratio = std::max(worst_ratio, ratio);
        if (ratio >= 0.95) {
            *ok = false;
            return out;
        }
        // binomial series for (1 + delta/(u+pivot))^q
        std::vector<double> fac(kMaxJ, 0.0);
        double b = 1.0;
        for (int j = 0; j < kMaxJ; ++j) {
            fac[static_cast<size_t>(j)] = b;
            b *= (q - j) / (j + 1.0) * delta;
        }
        std::vector<double> next(std::min<size_t>(coeff.size() + kMaxJ, kMaxJ), 0.0);
        for (size_t i = 0; i < coeff.size(); ++i)
            for (int j = 0; j < kMaxJ && i + static_cast<size_t>(j) < next.size(); ++j)
                next[i + static_cast<size_t>(j)] += coeff[i] * fac[static_cast<size_t>(j)];
        coeff = std::move(next);
    }
    const double base = std::pow(from + pivot, q_total);
    double tail_scale = 1.0;
    for (size_t j = 0; j < coeff.size(); ++j) {
        const double c = term.coef * coeff[j];
        if (c != 0.0) out.push_back({c, pivot, q_total - static_cast<double>(j)});
        if (j + 1 == coeff.size() && worst_ratio > 0.0) {
            // geometric estimate for dropped part of the series at u = from
            const double last = std::abs(c) * base * tail_scale;
            *bound += last * worst_ratio / (1.0 - worst_ratio);
        }
        tail_scale /= (from + pivot);
    }
    return out;
}

// integral_{from}^{infinity} (u+a)^q exp(z u) du for Re z <= 0, via repeated
// integration by parts: t0 = -(from+a)^q e^{z from} / z,
// t_{k+1} = t_k * (-(q - k) / (z (from + a))).
std::complex<double> ibp_series(double a, double q, std::complex<double> z, double from,
                                double* bound, bool* converged) {
    const double x = from + a;
    std::complex<double> t = -std::pow(x, q) * std::exp(z * from) / z;
    std::complex<double> acc = 0.0;
    *converged = false;
    for (int k = 0; k < 80; ++k) {
        acc += t;
        const std::complex<double> next = t * (-(q - k) / (z * x));
        if (std::abs(next) < 1e-17 * (std::abs(acc) + 1e-300)) {
            *converged = true;
            *bound += std::abs(next);
            return acc;
        }
        if (std::abs(next) >= std::abs(t)) {
            // asymptotic series bottomed out; stop at the smallest term
            *bound += std::abs(next);
            return acc;
        }
        t = next;
    }
    *bound += std::abs(t);
    return acc;
}

double take_part(std::complex<double> v, Trig trig) {
    return (trig == Trig::Sin) ? v.imag() : v.real();
}

double eval_single(const SingleShift& s, const EnvTerm& t, double u) {
    double v = s.coef * std::pow(u + s.shift, s.power) * std::exp(-t.rate * u);
    if (t.trig == Trig::Cos) v *= std::cos(t.freq * u);
    else if (t.trig == Trig::Sin) v *= std::sin(t.freq * u);
    return v;
}

// integral over [from, to] by trapezoid at two resolutions; Richardson gap
// goes into *bound. Used to push the IBP start point far enough out that the
// series converges.
double numeric_stretch(const SingleShift& s, const EnvTerm& t, double from, double to,
                       double* bound) {
    double h = 0.25;
    if (t.freq > 0.0) h = std::min(h, 2.0 * 3.141592653589793 / t.freq / 32.0);
    const int n = std::max(64, static_cast<int>((to - from) / h) + 1);
    auto trapz = [&](int steps) {
        const double hh = (to - from) / steps;
        double acc = 0.5 * (eval_single(s, t, from) + eval_single(s, t, to));
        for (int i = 1; i < steps; ++i) acc += eval_single(s, t, from + hh * i);
        return acc * hh;
    };
    const double coarse = trapz(n);
    const double fine = trapz(2 * n);
    *bound += std::abs(fine - coarse) / 3.0;
    return fine;
}

// integral_{from}^{infinity} of a reduced single-shift factor.
TailEval single_tail(const SingleShift& s, const EnvTerm& t, double from) {
    TailEval out;
    if (s.coef == 0.0) return out;
    const double q = s.power;
    const double r = t.rate;
    const double w = (t.trig == Trig::One) ? 0.0 : t.freq;

    if (r < 0.0) {
        out.divergent = true;
        out.note = "growing exponential factor";
        return out;
    }
    if (r == 0.0 && w == 0.0) {
        if (q >= -1.0) {
            out.divergent = true;
            out.note = "non-integrable power tail";
            return out;
        }
        out.value = s.coef * std::pow(from + s.shift, q + 1.0) / (-(q + 1.0));
        return out;
    }
    if (r == 0.0 && w > 0.0 && q >= 0.0) {
        out.divergent = true;
        out.note = "non-decaying oscillation";
        return out;
    }

    const std::complex<double> z(-r, w);
    // push the start out until the IBP ratio is comfortable
    double start = from;
    const double need = 4.0 * (std::abs(q) + 4.0) / std::abs(z);
    if (start + s.shift < need) {
        const double to = need - s.shift;
        out.value += numeric_stretch(s, t, from, to, &out.bound);
        start = to;
    }
    bool converged = false;
    double bnd = 0.0;
    const std::complex<double> acc = ibp_series(s.shift, q, z, start, &bnd, &converged);
    out.value += s.coef * take_part(acc, t.trig);
    out.bound += std::abs(s.coef) * bnd;
    return out;
}

}  // namespace

TailEval term_tail(const EnvTerm& term, double from, double to) {
    TailEval out;
    bool ok = true;
    std::vector<SingleShift> parts = reduce_to_single_shift(term, from, &out.bound, &ok);
    if (!ok) {
        out.divergent = true;
        out.note = "shifted-power expansion not convergent at this horizon";
        return out;
    }
    for (const auto& s : parts) {
        TailEval a = single_tail(s, term, from);
        if (a.divergent) return a;
        out.value += a.value;
        out.bound += a.bound;
        if (std::isfinite(to)) {
            TailEval b = single_tail(s, term, to);
            if (b.divergent) return b;
            out.value -= b.value;
            out.bound += b.bound;
        }
    }
    return out;
}

TailEval envelope_tail(const PiecewiseEnvelope& env, double from) {
    TailEval out;
    double start = 0.0;
    for (size_t i = 0; i < env.pieces.size(); ++i) {
        const double end = (i + 1 == env.pieces.size()) ? kInf : env.pieces[i].end;
        const double lo = std::max(from, start);
        if (lo < end) {
            for (const auto& term : env.pieces[i].terms) {
                TailEval t = term_tail(term, lo, end);
                if (t.divergent) {
                    t.value = out.value;
                    return t;
                }
                out.value += t.value;
                out.bound += t.bound;
            }
        }
        start = env.pieces[i].end;
    }
    return out;
}

}  // namespace glelab
