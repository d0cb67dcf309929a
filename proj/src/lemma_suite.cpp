#include "pfsi/lemma_suite.hpp"

#include "pfsi/lemma_constants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pfsi {

namespace {

constexpr double pi = std::numbers::pi;

double uniform(LemmaRng& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(LemmaRng& rng, double lo, double hi)
{
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

int uniform_int(LemmaRng& rng, int lo, int hi)
{
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// horizontal basis [1, cos, sin, cos 2, ...] and its x-derivative at n centres
void horizontal_basis(int K, double L, int n, Eigen::MatrixXd& X, Eigen::MatrixXd& Xp)
{
    X.resize(n, 2 * K + 1);
    Xp.resize(n, 2 * K + 1);
    for (int i = 0; i < n; ++i) {
        const double x = (i + 0.5) * L / n;
        X(i, 0) = 1;
        Xp(i, 0) = 0;
        for (int k = 1; k <= K; ++k) {
            const double w = 2 * pi * k / L;
            X(i, 2 * k - 1) = std::cos(w * x);
            X(i, 2 * k) = std::sin(w * x);
            Xp(i, 2 * k - 1) = -w * std::sin(w * x);
            Xp(i, 2 * k) = w * std::cos(w * x);
        }
    }
}

void vertical_basis(ColumnSeries::Base base, int M, const Eigen::ArrayXd& zeta, Eigen::MatrixXd& Z,
                    Eigen::MatrixXd& Zp)
{
    const int n = static_cast<int>(zeta.size());
    Z.resize(n, M);
    Zp.resize(n, M);
    for (int j = 0; j < n; ++j)
        for (int m = 0; m < M; ++m) {
            const double s = zeta(j);
            if (base == ColumnSeries::Base::clamped_both) {
                const double w = (m + 1) * pi;
                Z(j, m) = std::sin(w * s);
                Zp(j, m) = w * std::cos(w * s);
            } else if (m == 0) {
                Z(j, m) = s;
                Zp(j, m) = 1;
            } else {
                const double w = (m - 0.5) * pi;
                Z(j, m) = std::sin(w * s);
                Zp(j, m) = w * std::cos(w * s);
            }
        }
}

std::string fmt(double v)
{
    std::ostringstream o;
    o.precision(6);
    o << v;
    return o.str();
}

LemmaTrial make_trial(std::string lemma, std::string desc, double lhs, double rhs, double C, double tol)
{
    LemmaTrial t;
    t.lemma = std::move(lemma);
    t.descriptor = std::move(desc);
    t.lhs = lhs;
    t.rhs = rhs;
    t.constant = C;
    t.tolerance = tol;
    t.pass = lhs <= C * rhs + tol;
    return t;
}

// weighted sum over the region under the graph in mapped coordinates
double mapped_integral(const Eigen::ArrayXXd& f, const Field1& eta, const MappedGrid& g, double L)
{
    const double w = L / g.nx / g.nzeta;
    return (f.colwise() * eta).sum() * w;
}

}  // namespace

double PeriodicSeries::value(double x, int order) const
{
    double v = order == 0 ? mean : 0.0;
    for (std::size_t k = 1; k <= a.size(); ++k) {
        const double w = 2 * pi * static_cast<double>(k) / L;
        const double c = std::cos(w * x), s = std::sin(w * x);
        // d^order/dx^order of a cos + b sin
        double dc = a[k - 1], ds = b[k - 1];
        for (int o = 0; o < order; ++o) {
            const double nc = w * ds, ns = -w * dc;
            dc = nc;
            ds = ns;
        }
        v += dc * c + ds * s;
    }
    return v;
}

Field1 PeriodicSeries::sample(int n, int order) const
{
    Field1 f(n);
    for (int i = 0; i < n; ++i)
        f(i) = value((i + 0.5) * L / n, order);
    return f;
}

std::string PeriodicSeries::describe() const
{
    std::string s = "mean=" + fmt(mean);
    for (std::size_t k = 0; k < a.size(); ++k)
        s += ";" + fmt(a[k]) + ":" + fmt(b[k]);
    return s;
}

std::string ColumnSeries::describe() const
{
    std::string s = base == Base::clamped_both ? "both" : "bottom";
    s += " K=" + std::to_string((c.rows() - 1) / 2) + " M=" + std::to_string(c.cols()) +
         " amp=" + fmt(c.cwiseAbs().maxCoeff());
    return s;
}

MappedSample sample_mapped(const ColumnSeries& u, const PeriodicSeries& eta, const MappedGrid& g)
{
    const int K = static_cast<int>((u.c.rows() - 1) / 2);
    const int M = static_cast<int>(u.c.cols());
    Eigen::MatrixXd X, Xp, Z, Zp, Z1, Z1p;
    horizontal_basis(K, u.L, g.nx, X, Xp);
    Eigen::ArrayXd zeta(g.nzeta);
    for (int j = 0; j < g.nzeta; ++j)
        zeta(j) = (j + 0.5) / g.nzeta;
    vertical_basis(u.base, M, zeta, Z, Zp);
    vertical_basis(u.base, M, Eigen::ArrayXd::Ones(1), Z1, Z1p);

    const Field1 e = eta.sample(g.nx), ex = eta.sample(g.nx, 1);
    const Eigen::MatrixXd XC = X * u.c;
    const Eigen::ArrayXXd U = (XC * Z.transpose()).array();
    const Eigen::ArrayXXd Ux = (Xp * u.c * Z.transpose()).array();
    const Eigen::ArrayXXd Uzeta = (XC * Zp.transpose()).array();

    MappedSample s;
    s.u = U;
    s.uz = Uzeta.colwise() / e;
    // d/dx at fixed z = d/dx at fixed zeta - zeta eta_x / eta d/dzeta
    const Eigen::ArrayXd r = ex / e;
    s.ux = Ux - (r.matrix() * zeta.matrix().transpose()).array() * Uzeta;
    s.trace = (XC * Z1.transpose()).array().col(0);
    return s;
}

PeriodicSeries random_profile(LemmaRng& rng, double L, int modes, double lo, double hi)
{
    PeriodicSeries p;
    p.L = L;
    std::normal_distribution<double> nd;
    for (int k = 1; k <= modes; ++k) {
        p.a.push_back(nd(rng) / k);
        p.b.push_back(nd(rng) / k);
    }
    // locate extrema on a dense sample, polish with Newton on the derivative
    const int n = 512 * std::max(modes, 1);
    double xmin = 0, xmax = 0, vmin = 1e300, vmax = -1e300;
    for (int i = 0; i < n; ++i) {
        const double x = i * L / n, v = p.value(x);
        if (v < vmin) { vmin = v; xmin = x; }
        if (v > vmax) { vmax = v; xmax = x; }
    }
    for (double* x : {&xmin, &xmax})
        for (int it = 0; it < 8; ++it) {
            const double d2 = p.value(*x, 2);
            if (d2 == 0)
                break;
            *x -= p.value(*x, 1) / d2;
        }
    vmin = std::min(vmin, p.value(xmin));
    vmax = std::max(vmax, p.value(xmax));
    const double scale = vmax > vmin ? (hi - lo) / (vmax - vmin) : 0.0;
    for (std::size_t k = 0; k < p.a.size(); ++k) {
        p.a[k] *= scale;
        p.b[k] *= scale;
    }
    p.mean = lo - scale * vmin;
    return p;
}

ColumnSeries random_column(LemmaRng& rng, ColumnSeries::Base base, double L, int modes_x, int modes_z,
                           double amplitude)
{
    ColumnSeries u;
    u.base = base;
    u.L = L;
    u.c.resize(2 * modes_x + 1, modes_z);
    std::normal_distribution<double> nd;
    for (int r = 0; r < u.c.rows(); ++r)
        for (int m = 0; m < modes_z; ++m)
            u.c(r, m) = amplitude * nd(rng) / ((1 + (r + 1) / 2) * (1 + m));
    return u;
}

namespace {

struct KornParts {
    double l2 = 0, grad = 0, div = 0, stress = 0;
    double l4 = 0, trace_l4 = 0;
};

KornParts korn_parts(const ColumnSeries& u1, const ColumnSeries& u3, const PeriodicSeries& eta,
                     const PhysParams& phys, const MappedGrid& g)
{
    const MappedSample a = sample_mapped(u1, eta, g), b = sample_mapped(u3, eta, g);
    const Field1 e = eta.sample(g.nx);
    const double L = eta.L, mu = phys.mu, kh = phys.lambda - 2 * mu / 3;
    const Eigen::ArrayXXd div = a.ux + b.uz;
    const Eigen::ArrayXXd shear = a.uz + b.ux;
    const Eigen::ArrayXXd mag2 = a.u.square() + b.u.square();
    KornParts k;
    k.l2 = mapped_integral(mag2, e, g, L);
    k.grad = mapped_integral(a.ux.square() + a.uz.square() + b.ux.square() + b.uz.square(), e, g, L);
    k.div = mapped_integral(div.square(), e, g, L);
    k.stress = mapped_integral(mu * (2 * a.ux.square() + 2 * b.uz.square() + shear.square()) + kh * div.square(),
                               e, g, L);
    k.l4 = std::pow(mapped_integral(mag2.square(), e, g, L), 0.25);
    k.trace_l4 = std::pow((a.trace.square() + b.trace.square()).square().sum() * L / g.nx, 0.25);
    return k;
}

}  // namespace

LemmaTrial check_korn(const ColumnSeries& u1, const ColumnSeries& u3, const PeriodicSeries& eta,
                      const PhysParams& phys, const MappedGrid& g, double C)
{
    const KornParts k = korn_parts(u1, u3, eta, phys, g);
    const double top = eta.sample(g.nx).maxCoeff();
    const double lhs = k.l2 + k.grad;
    const double rhs = (1 + top) * (1 + top) * k.stress;
    return make_trial("korn", "eta{" + eta.describe() + "} u1{" + u1.describe() + "} u3{" + u3.describe() + "}",
                      lhs, rhs, C, 1e-12 * (lhs + C * rhs));
}

double korn_identity_gap(const ColumnSeries& u1, const ColumnSeries& u3, const PeriodicSeries& eta,
                         const PhysParams& phys, const MappedGrid& g)
{
    const KornParts k = korn_parts(u1, u3, eta, phys, g);
    return k.stress - phys.mu * k.grad - (phys.mu / 3 + phys.lambda) * k.div;
}

std::vector<LemmaTrial> check_weighted_trace(const ColumnSeries& u, const PeriodicSeries& eta, const MappedGrid& g)
{
    const MappedSample s = sample_mapped(u, eta, g);
    const Field1 e = eta.sample(g.nx);
    const double L = eta.L, dzeta = 1.0 / g.nzeta;
    const double dz2 = mapped_integral(s.uz.square(), e, g, L);
    const double tr = (s.trace.square() / e).sum() * L / g.nx;
    const double weighted = mapped_integral(s.u.square().colwise() / e.square(), e, g, L);
    const std::string d = "eta{" + eta.describe() + "} u{" + u.describe() + "}";
    return {make_trial("weighted_trace", d, tr, dz2, 1.0, dzeta * dz2),
            make_trial("weighted_l2", d, weighted, dz2, 1.0, dzeta * dz2)};
}

LemmaTrial check_grad_log(const PeriodicSeries& eta, double s, int n, double C)
{
    const Field1 e = eta.sample(n), e1 = eta.sample(n, 1), e2 = eta.sample(n, 2);
    const double dx = eta.L / n;
    const double lhs = (e1.abs().pow(2 * s) / e.pow(s)).sum() * dx;
    const double rhs = e2.abs().pow(s).sum() * dx;
    return make_trial(s == 1 ? "grad_log_s1" : s == 2 ? "grad_log_s2" : "grad_log_s" + fmt(s),
                      "eta{" + eta.describe() + "}", lhs, rhs, C, 1e-12 * (lhs + C * rhs));
}

LemmaTrial check_max_min(const PeriodicSeries& eta, int n, double C)
{
    const Field1 e = eta.sample(n), e2 = eta.sample(n, 2);
    const double lhs = e.maxCoeff() - e.minCoeff();
    const double rhs = std::sqrt(e2.square().sum() * eta.L / n);
    return make_trial("max_min", "eta{" + eta.describe() + "}", lhs, rhs, C, 1e-12 * (lhs + C * rhs));
}

LemmaTrial check_ln_semicontinuity(const Field1& eta, const std::vector<Field1>& sequence, const Field1& phi,
                                   double dx)
{
    auto functional = [&](const Field1& f) {
        return (f.log().min(0.0).abs() * phi).sum() * dx;  // ln^- = max(-ln, 0)
    };
    const double lhs = functional(eta);
    double rhs = lhs, tol = 0;
    if (!sequence.empty()) {
        rhs = functional(sequence.back());
        if (sequence.size() > 1)
            tol = std::abs(rhs - functional(sequence[sequence.size() - 2]));
    }
    tol += 1e-12 * (std::abs(lhs) + std::abs(rhs));
    return make_trial("ln_semicontinuity", "n_members=" + std::to_string(sequence.size()), lhs, rhs, 1.0, tol);
}

namespace {

// Trial families shared by calibration and the battery.
struct KornDraw {
    PeriodicSeries eta;
    ColumnSeries u1, u3;
};

KornDraw draw_korn(LemmaRng& rng, double L)
{
    KornDraw d;
    const double lo = uniform(rng, 0.05, 0.5);
    d.eta = random_profile(rng, L, uniform_int(rng, 1, 8), lo, lo + uniform(rng, 0.05, 1.0));
    d.u1 = random_column(rng, ColumnSeries::Base::clamped_both, L, uniform_int(rng, 0, 8), uniform_int(rng, 1, 8), 1.0);
    d.u3 = random_column(rng, ColumnSeries::Base::clamped_bottom, L, uniform_int(rng, 0, 8), uniform_int(rng, 1, 8),
                         1.0);
    return d;
}

PeriodicSeries draw_positive(LemmaRng& rng, double L)
{
    const double range = uniform(rng, 0.1, 1.0);
    const double lo = range * log_uniform(rng, 1e-3, 1.0);
    return random_profile(rng, L, uniform_int(rng, 1, 8), lo, lo + range);
}

PeriodicSeries draw_any(LemmaRng& rng, double L)
{
    const double lo = uniform(rng, -1.0, 1.0);
    return random_profile(rng, L, uniform_int(rng, 1, 8), lo, lo + uniform(rng, 0.1, 2.0));
}

double ratio(const LemmaTrial& t)
{
    return t.rhs > 0 ? t.lhs / t.rhs : 0.0;
}

}  // namespace

LemmaConstants calibrate_lemma_constants(std::uint64_t seed, int trials, const PhysParams& phys, double safety)
{
    const double L = 1.0;
    const MappedGrid fine{256, 128};
    const int n1 = 4096;
    LemmaRng rng(seed);
    LemmaConstants c;
    for (int t = 0; t < trials; ++t) {
        const KornDraw k = draw_korn(rng, L);
        c.korn = std::max(c.korn, ratio(check_korn(k.u1, k.u3, k.eta, phys, fine, 1.0)));
        const PeriodicSeries p = draw_positive(rng, L);
        c.grad_log_s1 = std::max(c.grad_log_s1, ratio(check_grad_log(p, 1, n1, 1.0)));
        c.grad_log_s2 = std::max(c.grad_log_s2, ratio(check_grad_log(p, 2, n1, 1.0)));
        c.max_min = std::max(c.max_min, ratio(check_max_min(draw_any(rng, L), n1, 1.0)));
    }
    c.korn *= safety;
    c.grad_log_s1 *= safety;
    c.grad_log_s2 *= safety;
    c.max_min *= safety;
    return c;
}

bool LemmaReport::all_pass() const
{
    return std::all_of(trials.begin(), trials.end(), [](const LemmaTrial& t) { return t.pass; });
}

int LemmaReport::failures(const std::string& lemma) const
{
    return static_cast<int>(std::count_if(trials.begin(), trials.end(),
                                          [&](const LemmaTrial& t) { return t.lemma == lemma && !t.pass; }));
}

LemmaReport run_lemma_suite(std::uint64_t seed, int trials, const PhysParams& phys)
{
    const double L = 1.0;
    const MappedGrid grid{256, 64};
    const int n1 = 1024;
    const LemmaConstants& C = frozen_lemma_constants;
    LemmaRng rng(seed);
    LemmaReport rep;
    auto push = [&](LemmaTrial t, int i) {
        t.trial = i;
        rep.trials.push_back(std::move(t));
    };

    for (int i = 0; i < trials; ++i) {
        const KornDraw k = draw_korn(rng, L);
        push(check_korn(k.u1, k.u3, k.eta, phys, grid, C.korn), i);
        const KornParts parts = korn_parts(k.u1, k.u3, k.eta, phys, grid);
        const double h1 = std::sqrt(parts.l2 + parts.grad);
        if (h1 > 0) {
            rep.max_l4_over_h1 = std::max(rep.max_l4_over_h1, parts.l4 / h1);
            rep.max_trace_l4_over_h1 = std::max(rep.max_trace_l4_over_h1, parts.trace_l4 / h1);
        }
    }
    for (int i = 0; i < trials; ++i) {
        const double lo = uniform(rng, 0.02, 0.5);
        const PeriodicSeries eta = random_profile(rng, L, uniform_int(rng, 1, 8), lo, lo + uniform(rng, 0.05, 1.0));
        const ColumnSeries u =
            random_column(rng, ColumnSeries::Base::clamped_bottom, L, uniform_int(rng, 0, 8), uniform_int(rng, 1, 8), 1.0);
        for (auto& t : check_weighted_trace(u, eta, grid))
            push(std::move(t), i);
    }
    for (int i = 0; i < trials; ++i) {
        const PeriodicSeries p = draw_positive(rng, L);
        push(check_grad_log(p, 1, n1, C.grad_log_s1), i);
        push(check_grad_log(p, 2, n1, C.grad_log_s2), i);
    }
    for (int i = 0; i < trials; ++i)
        push(check_max_min(draw_any(rng, L), n1, C.max_min), i);
    for (int i = 0; i < trials; ++i) {
        // touch-down or uniformly positive limit, approached by eta + 1/n
        const double lo = uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : uniform(rng, 0.01, 0.5);
        const PeriodicSeries eta = random_profile(rng, L, uniform_int(rng, 1, 8), lo, lo + uniform(rng, 0.1, 1.0));
        const PeriodicSeries phi = random_profile(rng, L, uniform_int(rng, 1, 8), 0.0, uniform(rng, 0.1, 1.0));
        const Field1 e = eta.sample(n1).max(std::numeric_limits<double>::min()), w = phi.sample(n1);
        std::vector<Field1> seq;
        for (int p = 0; p <= 52; p += 4)
            seq.push_back(e + std::ldexp(1.0, -p));
        LemmaTrial t = check_ln_semicontinuity(e, seq, w, L / n1);
        t.descriptor = "eta{" + eta.describe() + "} phi{" + phi.describe() + "} " + t.descriptor;
        push(std::move(t), i);
    }

    // quadrature error of the Korn identity under one halving
    LemmaRng krng(seed ^ 0x9e3779b97f4a7c15ULL);
    const KornDraw k = draw_korn(krng, L);
    rep.korn_gap_coarse = std::abs(korn_identity_gap(k.u1, k.u3, k.eta, phys, {64, 16}));
    rep.korn_gap_fine = std::abs(korn_identity_gap(k.u1, k.u3, k.eta, phys, {128, 32}));
    rep.korn_order = std::log2(rep.korn_gap_coarse / rep.korn_gap_fine);
    return rep;
}

}  // namespace pfsi
