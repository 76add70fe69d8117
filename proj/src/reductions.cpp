#include "ccm/reductions.hpp"

#include <cmath>

#include "ccm/stats.hpp"

namespace ccm {

double l1_distance(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw DimensionError("l1_distance: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::fabs(a[i] - b[i]);
    return d;
}

double l2_distance(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw DimensionError("l2_distance: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(d);
}

GaussCube::GaussCube(std::size_t n) : n_(n) {
    if (n < 2 || n % 2 != 0) throw std::invalid_argument("GaussCube: n must be even and >= 2");
    double rt = std::sqrt(static_cast<double>(n));
    cell_cdf_.resize(n + 2);
    for (std::size_t a = 0; a <= n + 1; ++a) {
        double boundary = (2.0 * static_cast<double>(a) - static_cast<double>(n) - 1.0) / (2.0 * rt);
        cell_cdf_[a] = normal_cdf(boundary / sigma());
    }
}

double GaussCube::lipschitz_w() const { return 1.0 / std::sqrt(static_cast<double>(n_)); }
double GaussCube::roundtrip_slack() const { return std::sqrt(static_cast<double>(n_)) / 2.0; }

long long GaussCube::count_of(double x) const {
    double rt = std::sqrt(static_cast<double>(n_));
    long long a = std::llround(rt * x + static_cast<double>(n_) / 2.0);
    if (a < 0) a = 0;
    if (a > static_cast<long long>(n_)) a = static_cast<long long>(n_);
    return a;
}

Trajectory GaussCube::to_cube(const Trajectory& x, RngStream& rng) const {
    if (x.size() != n_) throw DimensionError("GaussCube::to_cube: dimension mismatch");
    double clamp = std::sqrt(static_cast<double>(n_)) / 2.0;
    for (double xi : x)
        if (std::fabs(xi) >= clamp) return Trajectory(n_ * n_, 0.0);
    Trajectory y(n_ * n_, 0.0);
    std::vector<std::size_t> idx(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        auto a = static_cast<std::size_t>(count_of(x[i]));
        for (std::size_t j = 0; j < n_; ++j) idx[j] = j;
        for (std::size_t j = 0; j < a; ++j) {
            std::size_t k = j + static_cast<std::size_t>(rng.uniform_below(n_ - j));
            std::swap(idx[j], idx[k]);
            y[i * n_ + idx[j]] = 1.0;
        }
    }
    return y;
}

Trajectory GaussCube::to_gauss(const Trajectory& y, RngStream& rng) const {
    if (y.size() != n_ * n_) throw DimensionError("GaussCube::to_gauss: dimension mismatch");
    Trajectory x(n_);
    for (std::size_t i = 0; i < n_; ++i) {
        std::size_t a = 0;
        for (std::size_t j = 0; j < n_; ++j)
            if (y[i * n_ + j] != 0.0) ++a;
        double lo = cell_cdf_[a], hi = cell_cdf_[a + 1];
        double u = lo + rng.uniform() * (hi - lo);
        x[i] = sigma() * normal_quantile(u);
    }
    return x;
}

CCReduction GaussCube::reduction() const {
    GaussCube copy = *this;
    CCReduction red;
    red.f = [copy](const Trajectory& x, RngStream& rng) { return copy.to_cube(x, rng); };
    red.g = [copy](const Trajectory& y, RngStream& rng) { return copy.to_gauss(y, rng); };
    red.alpha = 0.01;
    red.b = roundtrip_slack();
    red.w = lipschitz_w();
    return red;
}

Trajectory gauss_to_cube(const Trajectory& x, RngStream& rng) {
    return GaussCube(x.size()).to_cube(x, rng);
}

Trajectory cube_to_gauss(const Trajectory& y, RngStream& rng) {
    auto n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(y.size()))));
    if (n * n != y.size())
        throw DimensionError("cube_to_gauss: dimension must be a perfect square");
    return GaussCube(n).to_gauss(y, rng);
}

std::size_t default_majority_votes(std::size_t n, double delta) {
    double nn = static_cast<double>(n);
    return static_cast<std::size_t>(std::ceil(48.0 * std::log(8.0 * nn * nn / delta)));
}

Trajectory lift_attack(const CCReduction& red, const InnerAttack& inner,
                       const MembershipOracle& S, const Trajectory& x1, std::size_t m_g,
                       std::size_t out_draws, RngStream rng) {
    if (m_g < 1 || out_draws < 1)
        throw std::invalid_argument("lift_attack: m_g and out_draws must be >= 1");
    if (m_g % 2 == 0) ++m_g;
    RngStream f_rng = rng.child("f");
    RngStream vote_rng = rng.child("vote");
    RngStream inner_rng = rng.child("inner");
    RngStream out_rng = rng.child("out");

    Trajectory x2 = red.f(x1, f_rng);
    std::size_t need = m_g / 2 + 1;
    RngStream* votes = &vote_rng;
    MembershipOracle sprime([&red, &S, m_g, need, votes](const Trajectory& y) {
        std::size_t hits = 0, misses = 0;
        for (std::size_t v = 0; v < m_g; ++v) {
            if (S.test(red.g(y, *votes))) {
                if (++hits >= need) return true;
            } else {
                if (++misses >= need) return false;
            }
        }
        return false;
    });
    Trajectory y2 = inner(sprime, x2, inner_rng);
    Trajectory out;
    for (std::size_t t = 0; t < out_draws; ++t) {
        out = red.g(y2, out_rng);
        if (S.test(out)) return out;
    }
    return out;
}

AttackResult gaussian_l1_attack(const MembershipOracle& S, double eps, double delta,
                                const Trajectory& x, RngStream rng,
                                const GaussAttackOptions& opts) {
    std::size_t n = x.size();
    double scale = opts.sigma / 0.5;
    Trajectory xi(n);
    for (std::size_t i = 0; i < n; ++i) xi[i] = x[i] / scale;
    MembershipOracle Si([&S, scale](const Trajectory& z) {
        Trajectory w = z;
        for (double& v : w) v *= scale;
        return S.test(w);
    });
    std::uint64_t q0 = S.query_count();

    GaussCube gc(n);
    CCReduction red = gc.reduction();
    std::size_t N = n * n;
    TamperParams tp = worst_case_params(N, eps / 2.0, delta / 2.0);

    AttackResult res;
    InnerAttack inner = [&](const MembershipOracle& s2, const Trajectory& x2, RngStream& irng) {
        RandomProcess cube = fair_bits(N);
        auto oracle = make_mc_oracle(cube, &s2, {opts.m_eval, opts.m_max});
        TamperTranscript tr = run_tampering(cube, s2, *oracle, tp, irng, &x2);
        res.budget = tr.budget_used;
        res.aborted = tr.aborted;
        return tr.v;
    };
    Trajectory yi = lift_attack(red, inner, Si, xi, default_majority_votes(n, delta), n, rng);
    res.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) res.y[i] = yi[i] * scale;
    res.success = S.test(res.y);
    res.displacement = l1_distance(x, res.y);
    res.queries = S.query_count() - q0;
    return res;
}

AttackResult gaussian_l2_attack(const MembershipOracle& S, double eps, double delta,
                                const Trajectory& x, RngStream rng,
                                const GaussAttackOptions& opts) {
    std::size_t n = x.size();
    double m = std::min(eps, delta);
    double C = opts.sigma * std::sqrt(2.0 * std::log(4.0 * static_cast<double>(n) / m));
    AttackResult res;
    res.y = x;
    for (double xi : x) {
        if (std::fabs(xi) >= C) return res;  // outside the clamp window, counted in delta
    }
    RandomProcess proc = truncated_gaussian_iid(n, opts.sigma, C);
    std::uint64_t q0 = S.query_count();
    MembershipOracle Sw([&S, C](const Trajectory& z) {
        for (double v : z)
            if (std::fabs(v) > C) return false;
        return S.test(z);
    });
    TamperParams tp = worst_case_params(n, eps / 2.0, delta / 2.0);
    auto oracle = make_mc_oracle(proc, &Sw, {opts.m_eval, opts.m_max});
    TamperTranscript tr = run_tampering(proc, Sw, *oracle, tp, rng, &x);
    res.y = tr.v;
    res.aborted = tr.aborted;
    res.budget = tr.budget_used;
    res.success = tr.success;
    res.displacement = l2_distance(x, res.y);
    res.queries = S.query_count() - q0;
    return res;
}

double radial_band_constant(std::size_t n, double q) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("radial_band_constant: q in (0,1)");
    double nn = static_cast<double>(n);
    double quarter = std::pow(nn, 0.25);
    auto coverage = [&](double c) {
        double lo = std::max(0.0, std::sqrt(nn) - c * quarter);
        double hi = std::sqrt(nn) + c * quarter;
        return gamma_p(nn / 2.0, hi * hi / 2.0) - gamma_p(nn / 2.0, lo * lo / 2.0);
    };
    double lo = 0.0, hi = 1.0;
    while (coverage(hi) < 1.0 - q) {
        hi *= 2.0;
        if (hi > 1e6) throw std::runtime_error("radial_band_constant: band search diverged");
    }
    for (int it = 0; it < 80; ++it) {
        double mid = (lo + hi) / 2.0;
        (coverage(mid) >= 1.0 - q ? hi : lo) = mid;
    }
    return hi;
}

AttackResult sphere_attack(const MembershipOracle& S_sphere, double eps, double delta,
                           const Trajectory& x_unit, RngStream rng,
                           const GaussAttackOptions& opts) {
    std::size_t n = x_unit.size();
    double norm = l2_distance(x_unit, Trajectory(n, 0.0));
    if (std::fabs(norm - 1.0) > 1e-9)
        throw std::invalid_argument("sphere_attack: input must be a unit vector");

    RngStream r_rng = rng.child("radius");
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double z = r_rng.normal();
        r2 += z * z;
    }
    double r = std::sqrt(r2);
    Trajectory x2(n);
    for (std::size_t i = 0; i < n; ++i) x2[i] = r * x_unit[i];

    double q = std::min(eps, delta) / 4.0;
    double c = radial_band_constant(n, q);
    double nn = static_cast<double>(n);
    double band_lo = std::sqrt(nn) - c * std::pow(nn, 0.25);
    double band_hi = std::sqrt(nn) + c * std::pow(nn, 0.25);

    std::uint64_t q0 = S_sphere.query_count();
    MembershipOracle S2([&S_sphere, band_lo, band_hi, n](const Trajectory& p) {
        double nrm = l2_distance(p, Trajectory(n, 0.0));
        if (nrm < band_lo || nrm > band_hi || nrm == 0.0) return false;
        Trajectory u = p;
        for (double& v : u) v /= nrm;
        return S_sphere.test(u);
    });
    GaussAttackOptions inner_opts = opts;
    inner_opts.sigma = 1.0;
    double eps_inner = 0.9 * (1.0 - q) * eps;
    AttackResult lifted = gaussian_l2_attack(S2, eps_inner, delta / 2.0, x2, rng.child("l2"),
                                             inner_opts);
    AttackResult res;
    res.budget = lifted.budget;
    res.aborted = lifted.aborted;
    double out_norm = l2_distance(lifted.y, Trajectory(n, 0.0));
    if (out_norm < 1e-12) {
        res.y = x_unit;
        res.success = false;
        res.queries = S_sphere.query_count() - q0;
        return res;
    }
    res.y = lifted.y;
    for (double& v : res.y) v /= out_norm;
    res.success = S_sphere.test(res.y);
    res.displacement = l2_distance(x_unit, res.y);
    res.queries = S_sphere.query_count() - q0;
    return res;
}

}  // namespace ccm
