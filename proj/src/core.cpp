#include "ccm/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "ccm/stats.hpp"
#include <json.hpp>

namespace ccm {

BlockDomain BlockDomain::finite(std::vector<double> vals) {
    if (vals.empty()) throw std::invalid_argument("BlockDomain: finite domain must be non-empty");
    std::set<double> uniq(vals.begin(), vals.end());
    if (uniq.size() != vals.size())
        throw std::invalid_argument("BlockDomain: duplicate values in finite domain");
    BlockDomain d;
    d.kind = Kind::Finite;
    d.values = std::move(vals);
    return d;
}

bool BlockDomain::contains(double v) const {
    if (kind == Kind::Real) return true;
    return std::find(values.begin(), values.end(), v) != values.end();
}

WeightVector WeightVector::make(std::vector<double> alpha) {
    double ss = 0.0;
    for (double a : alpha) {
        if (a < 0.0) throw std::invalid_argument("WeightVector: negative weight");
        ss += a * a;
    }
    double n = static_cast<double>(alpha.size());
    if (n > 0 && std::fabs(ss - n) > 1e-9 * n)
        throw std::invalid_argument("WeightVector: sum of squared weights must equal n");
    WeightVector w;
    w.alpha = std::move(alpha);
    return w;
}

WeightVector WeightVector::uniform(std::size_t n) {
    WeightVector w;
    w.alpha.assign(n, 1.0);
    return w;
}

double WeightVector::l2_norm() const {
    double ss = 0.0;
    for (double a : alpha) ss += a * a;
    return std::sqrt(ss);
}

double weighted_hamming(const Trajectory& u, const Trajectory& v, const WeightVector& alpha) {
    if (u.size() != v.size() || u.size() != alpha.size())
        throw DimensionError("weighted_hamming: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        if (u[i] != v[i]) d += alpha[i];
    return d;
}

Trajectory sample_trajectory(const RandomProcess& p, RngStream& rng) {
    Trajectory t;
    t.reserve(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        double x = p.sampler(t, rng);
        if (!p.domains[i].contains(x))
            throw ContractViolation("sample_trajectory: sampler output outside block domain");
        t.push_back(x);
    }
    return t;
}

static void enumerate_rec(const RandomProcess& p, Trajectory& prefix, double prob,
                          std::vector<SupportEntry>& out) {
    std::size_t i = prefix.size();
    if (i == p.n) {
        out.push_back({prefix, prob});
        return;
    }
    SupportList sup = p.support_enumerator(prefix);
    for (double v : p.domains[i].values) {
        double pv = 0.0;
        for (const auto& [sv, sp] : sup)
            if (sv == v) pv = sp;
        prefix.push_back(v);
        enumerate_rec(p, prefix, prob * pv, out);
        prefix.pop_back();
    }
}

std::vector<SupportEntry> enumerate_support(const RandomProcess& p, std::size_t cap) {
    if (!p.finite())
        throw std::invalid_argument("enumerate_support: all block domains must be finite");
    if (!p.support_enumerator)
        throw std::invalid_argument("enumerate_support: process has no support enumerator");
    double size_est = 1.0;
    for (const auto& d : p.domains) size_est *= static_cast<double>(d.values.size());
    if (size_est > static_cast<double>(cap))
        throw std::invalid_argument("enumerate_support: support size " +
                                    std::to_string(size_est) + " exceeds cap " +
                                    std::to_string(cap));
    std::vector<SupportEntry> out;
    out.reserve(static_cast<std::size_t>(size_est));
    Trajectory prefix;
    enumerate_rec(p, prefix, 1.0, out);
    double total = 0.0;
    for (const auto& e : out) total += e.probability;
    if (std::fabs(total - 1.0) > 1e-10)
        throw ContractViolation("enumerate_support: probabilities sum to " + std::to_string(total));
    return out;
}

std::string trajectory_to_json(const RandomProcess& p, const Trajectory& t) {
    if (t.size() != p.n) throw DimensionError("trajectory_to_json: length mismatch");
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& d = p.domains[i];
        if (d.kind == BlockDomain::Kind::Finite) {
            auto it = std::find(d.values.begin(), d.values.end(), t[i]);
            if (it == d.values.end())
                throw ContractViolation("trajectory_to_json: value not in domain");
            arr.push_back(static_cast<std::size_t>(it - d.values.begin()));
        } else {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", t[i]);
            arr.push_back(std::string(buf));
        }
    }
    return arr.dump();
}

Trajectory trajectory_from_json(const RandomProcess& p, const std::string& json) {
    nlohmann::json arr = nlohmann::json::parse(json);
    if (!arr.is_array() || arr.size() != p.n)
        throw DimensionError("trajectory_from_json: wrong shape");
    Trajectory t;
    t.reserve(p.n);
    for (std::size_t i = 0; i < p.n; ++i) {
        const auto& d = p.domains[i];
        if (d.kind == BlockDomain::Kind::Finite) {
            std::size_t idx = arr[i].get<std::size_t>();
            if (idx >= d.values.size())
                throw std::invalid_argument("trajectory_from_json: index out of range");
            t.push_back(d.values[idx]);
        } else {
            t.push_back(std::stod(arr[i].get<std::string>()));
        }
    }
    return t;
}

RandomProcess biased_bits(std::size_t n, double p_one) {
    if (p_one < 0.0 || p_one > 1.0) throw std::invalid_argument("biased_bits: p out of range");
    RandomProcess p;
    p.n = n;
    p.domains.assign(n, BlockDomain::finite({0.0, 1.0}));
    p.is_product = true;
    p.sampler = [p_one](const Trajectory&, RngStream& rng) {
        return rng.bernoulli(p_one) ? 1.0 : 0.0;
    };
    p.support_enumerator = [p_one](const Trajectory&) {
        return SupportList{{0.0, 1.0 - p_one}, {1.0, p_one}};
    };
    return p;
}

RandomProcess fair_bits(std::size_t n) { return biased_bits(n, 0.5); }

RandomProcess signed_bits(std::size_t n) {
    RandomProcess p;
    p.n = n;
    p.domains.assign(n, BlockDomain::finite({-1.0, 1.0}));
    p.is_product = true;
    p.sampler = [](const Trajectory&, RngStream& rng) {
        return (rng.next_u64() & 1u) ? 1.0 : -1.0;
    };
    p.support_enumerator = [](const Trajectory&) {
        return SupportList{{-1.0, 0.5}, {1.0, 0.5}};
    };
    return p;
}

RandomProcess iid_finite(std::size_t n, std::vector<double> values, std::vector<double> probs) {
    if (values.size() != probs.size() || values.empty())
        throw std::invalid_argument("iid_finite: bad value/prob lists");
    double total = 0.0;
    for (double q : probs) {
        if (q < 0.0) throw std::invalid_argument("iid_finite: negative probability");
        total += q;
    }
    if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("iid_finite: probs must sum to 1");
    RandomProcess p;
    p.n = n;
    p.domains.assign(n, BlockDomain::finite(values));
    p.is_product = true;
    p.sampler = [values, probs](const Trajectory&, RngStream& rng) {
        double u = rng.uniform(), acc = 0.0;
        for (std::size_t j = 0; j < values.size(); ++j) {
            acc += probs[j];
            if (u < acc) return values[j];
        }
        return values.back();
    };
    p.support_enumerator = [values, probs](const Trajectory&) {
        SupportList s;
        for (std::size_t j = 0; j < values.size(); ++j)
            if (probs[j] > 0.0) s.emplace_back(values[j], probs[j]);
        return s;
    };
    return p;
}

RandomProcess gaussian_iid(std::size_t n, double sigma) {
    RandomProcess p;
    p.n = n;
    p.domains.assign(n, BlockDomain::real());
    p.is_product = true;
    p.sampler = [sigma](const Trajectory&, RngStream& rng) { return sigma * rng.normal(); };
    return p;
}

RandomProcess truncated_gaussian_iid(std::size_t n, double sigma, double c) {
    if (c <= 0.0) throw std::invalid_argument("truncated_gaussian_iid: window must be positive");
    RandomProcess p;
    p.n = n;
    p.domains.assign(n, BlockDomain::real());
    p.is_product = true;
    double lo = normal_cdf(-c / sigma);
    double hi = normal_cdf(c / sigma);
    p.sampler = [sigma, lo, hi](const Trajectory&, RngStream& rng) {
        double u = lo + rng.uniform() * (hi - lo);
        return sigma * normal_quantile(u);
    };
    return p;
}

}  // namespace ccm
