#include "ccm/pexp.hpp"

#include <cmath>
#include <cstring>
#include <unordered_map>

namespace ccm {

namespace {

struct TrajHash {
    std::size_t operator()(const Trajectory& t) const {
        std::uint64_t h = 1469598103934665603ULL;
        for (double x : t) {
            std::uint64_t bits;
            std::memcpy(&bits, &x, sizeof bits);
            for (int i = 0; i < 8; ++i) {
                h ^= (bits >> (8 * i)) & 0xff;
                h *= 1099511628211ULL;
            }
        }
        return static_cast<std::size_t>(h);
    }
};

constexpr double kEdgeTol = 1e-9;

}  // namespace

OracleBudget oracle_sample_counts(double gamma, double tau, double eps_root, SizingMode sizing) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("oracle_sample_counts: gamma");
    if (!(tau >= 0.0)) throw std::invalid_argument("oracle_sample_counts: tau");
    if (!(eps_root > 0.0 && eps_root <= 1.0))
        throw std::invalid_argument("oracle_sample_counts: eps_root");
    double floor_est = std::exp(-tau) * eps_root;
    OracleBudget b;
    if (sizing == SizingMode::Cubic) {
        b.m_eval = static_cast<std::size_t>(std::ceil(8.0 / (gamma * gamma * gamma * floor_est)));
    } else {
        double err = gamma * floor_est / 2.0;
        b.m_eval = static_cast<std::size_t>(std::ceil(2.0 * std::log(2.0 / gamma) / (err * err)));
    }
    b.m_max = static_cast<std::size_t>(std::ceil(1.0 / (gamma * gamma * floor_est)));
    return b;
}

// ---------------------------------------------------------------------------
// Threshold sets

ThresholdSpec ThresholdSpec::fair_sum_ge(std::size_t n, double t) {
    ThresholdSpec s;
    s.n = n;
    s.weights.assign(n, 1.0);
    s.values.assign(n, {0.0, 1.0});
    s.p_hi.assign(n, 0.5);
    s.t = t;
    s.ge = true;
    return s;
}

ThresholdSpec ThresholdSpec::fair_sum_le(std::size_t n, double t) {
    ThresholdSpec s = fair_sum_ge(n, t);
    s.ge = false;
    return s;
}

ThresholdSpec ThresholdSpec::halfspace_le0(const std::vector<double>& coeffs) {
    ThresholdSpec s;
    s.n = coeffs.size();
    s.weights = coeffs;
    s.values.assign(s.n, {-1.0, 1.0});
    s.p_hi.assign(s.n, 0.5);
    s.t = 0.0;
    s.ge = false;
    return s;
}

RandomProcess ThresholdSpec::process() const {
    RandomProcess p;
    p.n = n;
    p.is_product = true;
    p.domains.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        p.domains.push_back(BlockDomain::finite({values[i].first, values[i].second}));
    auto vals = values;
    auto probs = p_hi;
    p.sampler = [vals, probs](const Trajectory& prefix, RngStream& rng) {
        std::size_t i = prefix.size();
        return rng.bernoulli(probs[i]) ? vals[i].second : vals[i].first;
    };
    p.support_enumerator = [vals, probs](const Trajectory& prefix) {
        std::size_t i = prefix.size();
        SupportList s;
        if (probs[i] < 1.0) s.emplace_back(vals[i].first, 1.0 - probs[i]);
        if (probs[i] > 0.0) s.emplace_back(vals[i].second, probs[i]);
        return s;
    };
    return p;
}

bool ThresholdSpec::in_set(const Trajectory& x) const {
    if (x.size() != n) throw DimensionError("ThresholdSpec::in_set: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += weights[i] * x[i];
    return ge ? (s >= t - kEdgeTol) : (s <= t + kEdgeTol);
}

MembershipOracle ThresholdSpec::membership() const {
    ThresholdSpec copy = *this;
    return MembershipOracle([copy](const Trajectory& x) { return copy.in_set(x); });
}

namespace {

// Suffix-distribution table for a ThresholdSpec.  The contribution of block i
// is rewritten as c_i + d_i * B_i with d_i a non-negative integer and B_i
// Bernoulli(q_i); tail[i][s] = Pr[sum_{j>=i} d_j B_j >= s].
struct ThresholdTable {
    ThresholdSpec spec;
    std::vector<double> c;          // per-block constant part
    std::vector<long long> d;       // per-block integer increment
    std::vector<double> q;          // Pr[increment occurs]
    std::vector<double> c_suffix;   // sum_{j>=i} c_j, size n+1
    std::vector<long long> d_suffix;  // sum_{j>=i} d_j, size n+1
    std::vector<std::vector<double>> tail;  // size n+1

    explicit ThresholdTable(ThresholdSpec s) : spec(std::move(s)) {
        std::size_t n = spec.n;
        if (spec.weights.size() != n || spec.values.size() != n || spec.p_hi.size() != n)
            throw std::invalid_argument("ThresholdSpec: inconsistent field sizes");
        c.resize(n);
        d.resize(n);
        q.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            double lo = spec.values[i].first, hi = spec.values[i].second;
            double raw = spec.weights[i] * (hi - lo);
            double mag = std::fabs(raw);
            long long di = static_cast<long long>(std::llround(mag));
            if (std::fabs(mag - static_cast<double>(di)) > 1e-9)
                throw std::invalid_argument(
                    "threshold oracle: weight * value-gap must be an integer");
            d[i] = di;
            if (raw >= 0.0) {
                c[i] = spec.weights[i] * lo;
                q[i] = spec.p_hi[i];
            } else {
                c[i] = spec.weights[i] * hi;
                q[i] = 1.0 - spec.p_hi[i];
            }
        }
        c_suffix.assign(n + 1, 0.0);
        d_suffix.assign(n + 1, 0);
        for (std::size_t i = n; i-- > 0;) {
            c_suffix[i] = c_suffix[i + 1] + c[i];
            d_suffix[i] = d_suffix[i + 1] + d[i];
        }
        tail.resize(n + 1);
        std::vector<double> dist{1.0};  // distribution of the suffix lattice sum
        tail[n] = {1.0};
        for (std::size_t i = n; i-- > 0;) {
            std::vector<double> next(dist.size() + static_cast<std::size_t>(d[i]), 0.0);
            for (std::size_t s = 0; s < dist.size(); ++s) {
                next[s] += dist[s] * (1.0 - q[i]);
                next[s + static_cast<std::size_t>(d[i])] += dist[s] * q[i];
            }
            dist.swap(next);
            auto& t = tail[i];
            t.assign(dist.size() + 1, 0.0);
            for (std::size_t s = dist.size(); s-- > 0;) t[s] = t[s + 1] + dist[s];
        }
    }

    double eval(const Trajectory& prefix) const {
        std::size_t i = prefix.size();
        if (i > spec.n) throw DimensionError("threshold oracle: prefix too long");
        double acc = 0.0;
        for (std::size_t j = 0; j < i; ++j) acc += spec.weights[j] * prefix[j];
        double r = spec.t - acc - c_suffix[i];
        if (spec.ge) {
            long long s = static_cast<long long>(std::ceil(r - kEdgeTol));
            if (s <= 0) return 1.0;
            if (s > d_suffix[i]) return 0.0;
            return tail[i][static_cast<std::size_t>(s)];
        }
        long long s = static_cast<long long>(std::floor(r + kEdgeTol));
        if (s < 0) return 0.0;
        if (s >= d_suffix[i]) return 1.0;
        return 1.0 - tail[i][static_cast<std::size_t>(s + 1)];
    }
};

}  // namespace

double threshold_partial_expectation(const ThresholdSpec& spec, const Trajectory& prefix) {
    return ThresholdTable(spec).eval(prefix);
}

double threshold_measure(const ThresholdSpec& spec) {
    return threshold_partial_expectation(spec, {});
}

// ---------------------------------------------------------------------------
// Exact enumeration

static double exact_rec(const RandomProcess& p, const MembershipOracle& f, Trajectory& prefix) {
    if (prefix.size() == p.n) return f.test(prefix) ? 1.0 : 0.0;
    SupportList sup = p.support_enumerator(prefix);
    double acc = 0.0;
    for (const auto& [v, pv] : sup) {
        if (pv == 0.0) continue;
        prefix.push_back(v);
        acc += pv * exact_rec(p, f, prefix);
        prefix.pop_back();
    }
    return acc;
}

double exact_partial_expectation(const RandomProcess& p, const MembershipOracle& f,
                                 const Trajectory& prefix, std::size_t cap) {
    if (!p.support_enumerator)
        throw std::invalid_argument("exact_partial_expectation: no support enumerator");
    double remaining = 1.0;
    for (std::size_t i = prefix.size(); i < p.n; ++i)
        remaining *= static_cast<double>(p.domains[i].values.size());
    if (remaining > static_cast<double>(cap))
        throw std::invalid_argument("exact_partial_expectation: completion count exceeds cap");
    Trajectory scratch = prefix;
    return exact_rec(p, f, scratch);
}

double mc_partial_expectation(const RandomProcess& p, const MembershipOracle& f,
                              const Trajectory& prefix, std::size_t m_eval, RngStream& rng) {
    if (m_eval < 1) throw std::invalid_argument("mc_partial_expectation: m_eval must be >= 1");
    Trajectory scratch = prefix;
    std::size_t hits = 0;
    for (std::size_t s = 0; s < m_eval; ++s) {
        scratch.resize(prefix.size());
        while (scratch.size() < p.n) scratch.push_back(p.sampler(scratch, rng));
        if (f.test(scratch)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(m_eval);
}

std::pair<double, double> approx_max_block(
    const RandomProcess& p, const std::function<double(const Trajectory&)>& eval,
    const Trajectory& prefix, std::size_t m_max, RngStream& rng) {
    if (m_max < 1) throw std::invalid_argument("approx_max_block: m_max must be >= 1");
    Trajectory ext = prefix;
    ext.push_back(0.0);
    double best_val = 0.0, best_est = -1.0;
    for (std::size_t s = 0; s < m_max; ++s) {
        double cand = p.sampler(prefix, rng);
        ext.back() = cand;
        double est = eval(ext);
        if (est > best_est) {
            best_est = est;
            best_val = cand;
        }
    }
    double fstar = std::max(best_est, eval(prefix));
    return {best_val, fstar};
}

// ---------------------------------------------------------------------------
// Run oracles

namespace {

class CachedRunOracle : public RunOracle {
  public:
    double eval(const Trajectory& prefix) final {
        auto it = cache_.find(prefix);
        if (it != cache_.end()) return it->second;
        double v = eval_uncached(prefix);
        cache_.emplace(prefix, v);
        return v;
    }

  protected:
    virtual double eval_uncached(const Trajectory& prefix) = 0;
    std::unordered_map<Trajectory, double, TrajHash> cache_;
};

class ExactRunOracle final : public CachedRunOracle {
  public:
    ExactRunOracle(const RandomProcess* p, const MembershipOracle* f) : p_(p), f_(f) {}

    std::pair<double, double> max_block(const Trajectory& prefix) override {
        SupportList sup = p_->support_enumerator(prefix);
        Trajectory ext = prefix;
        ext.push_back(0.0);
        double best_val = sup.front().first, best_est = -1.0;
        for (const auto& [v, pv] : sup) {
            if (pv == 0.0) continue;
            ext.back() = v;
            double est = eval(ext);
            if (est > best_est) {
                best_est = est;
                best_val = v;
            }
        }
        return {best_val, std::max(best_est, eval(prefix))};
    }

    OracleMode mode() const override { return OracleMode::Exact; }

  protected:
    double eval_uncached(const Trajectory& prefix) override {
        if (prefix.size() == p_->n) return f_->test(prefix) ? 1.0 : 0.0;
        SupportList sup = p_->support_enumerator(prefix);
        double acc = 0.0;
        Trajectory ext = prefix;
        ext.push_back(0.0);
        for (const auto& [v, pv] : sup) {
            if (pv == 0.0) continue;
            ext.back() = v;
            acc += pv * eval(ext);
        }
        return acc;
    }

  private:
    const RandomProcess* p_;
    const MembershipOracle* f_;
};

class ThresholdRunOracle final : public RunOracle {
  public:
    explicit ThresholdRunOracle(std::shared_ptr<const ThresholdTable> table)
        : table_(std::move(table)) {}

    double eval(const Trajectory& prefix) override { return table_->eval(prefix); }

    std::pair<double, double> max_block(const Trajectory& prefix) override {
        std::size_t i = prefix.size();
        Trajectory ext = prefix;
        ext.push_back(table_->spec.values[i].first);
        double est_lo = table_->eval(ext);
        ext.back() = table_->spec.values[i].second;
        double est_hi = table_->eval(ext);
        double best_val = (est_hi > est_lo) ? table_->spec.values[i].second
                                            : table_->spec.values[i].first;
        double best_est = std::max(est_lo, est_hi);
        return {best_val, std::max(best_est, table_->eval(prefix))};
    }

    OracleMode mode() const override { return OracleMode::ThresholdAnalytic; }

  private:
    std::shared_ptr<const ThresholdTable> table_;
};

class McRunOracle final : public CachedRunOracle {
  public:
    McRunOracle(const RandomProcess* p, const MembershipOracle* f, OracleBudget budget,
                RngStream rng)
        : p_(p), f_(f), budget_(budget), rng_(rng) {}

    std::pair<double, double> max_block(const Trajectory& prefix) override {
        Trajectory ext = prefix;
        ext.push_back(0.0);
        double best_val = 0.0, best_est = -1.0;
        // A small finite support is scanned outright; sampled candidates can
        // miss a value entirely, which breaks the maximizer guarantee with
        // probability ~2^-(m_max-1) per call.  Sampling is kept for large or
        // continuous supports.
        SupportList sup;
        if (p_->support_enumerator) sup = p_->support_enumerator(prefix);
        if (!sup.empty() && sup.size() <= budget_.m_max) {
            for (const auto& [cand, pv] : sup) {
                if (pv == 0.0) continue;
                ext.back() = cand;
                double est = eval(ext);
                if (est > best_est) {
                    best_est = est;
                    best_val = cand;
                }
            }
        } else {
            for (std::size_t s = 0; s < budget_.m_max; ++s) {
                double cand = p_->sampler(prefix, rng_);
                ext.back() = cand;
                double est = eval(ext);
                if (est > best_est) {
                    best_est = est;
                    best_val = cand;
                }
            }
        }
        return {best_val, std::max(best_est, eval(prefix))};
    }

    OracleMode mode() const override { return OracleMode::MonteCarlo; }

  protected:
    double eval_uncached(const Trajectory& prefix) override {
        if (prefix.size() == p_->n) return f_->test(prefix) ? 1.0 : 0.0;
        scratch_.assign(prefix.begin(), prefix.end());
        std::size_t hits = 0;
        for (std::size_t s = 0; s < budget_.m_eval; ++s) {
            scratch_.resize(prefix.size());
            while (scratch_.size() < p_->n) scratch_.push_back(p_->sampler(scratch_, rng_));
            if (f_->test(scratch_)) ++hits;
        }
        return static_cast<double>(hits) / static_cast<double>(budget_.m_eval);
    }

  private:
    const RandomProcess* p_;
    const MembershipOracle* f_;
    OracleBudget budget_;
    RngStream rng_;
    Trajectory scratch_;
};

class ExactFactory final : public OracleFactory {
  public:
    ExactFactory(RandomProcess p, const MembershipOracle* f, std::size_t cap)
        : p_(std::move(p)), f_(f) {
        double size = 1.0;
        for (const auto& d : p_.domains) {
            if (d.kind != BlockDomain::Kind::Finite)
                throw std::invalid_argument("exact oracle: finite domains required");
            size *= static_cast<double>(d.values.size());
        }
        if (size > static_cast<double>(cap))
            throw std::invalid_argument("exact oracle: support exceeds cap");
    }
    std::unique_ptr<RunOracle> make_run(RngStream) const override {
        return std::make_unique<ExactRunOracle>(&p_, f_);
    }
    OracleMode mode() const override { return OracleMode::Exact; }

  private:
    RandomProcess p_;
    const MembershipOracle* f_;
};

class ThresholdFactory final : public OracleFactory {
  public:
    explicit ThresholdFactory(ThresholdSpec spec)
        : table_(std::make_shared<const ThresholdTable>(std::move(spec))) {}
    std::unique_ptr<RunOracle> make_run(RngStream) const override {
        return std::make_unique<ThresholdRunOracle>(table_);
    }
    OracleMode mode() const override { return OracleMode::ThresholdAnalytic; }

  private:
    std::shared_ptr<const ThresholdTable> table_;
};

class McFactory final : public OracleFactory {
  public:
    McFactory(RandomProcess p, const MembershipOracle* f, OracleBudget budget)
        : p_(std::move(p)), f_(f), budget_(budget) {
        if (budget_.m_eval < 1 || budget_.m_max < 1)
            throw std::invalid_argument("mc oracle: budget entries must be >= 1");
    }
    std::unique_ptr<RunOracle> make_run(RngStream rng) const override {
        return std::make_unique<McRunOracle>(&p_, f_, budget_, rng);
    }
    OracleMode mode() const override { return OracleMode::MonteCarlo; }

  private:
    RandomProcess p_;
    const MembershipOracle* f_;
    OracleBudget budget_;
};

}  // namespace

static Trajectory random_prefix(const RandomProcess& p, std::size_t len, RngStream& rng) {
    Trajectory t;
    t.reserve(len);
    while (t.size() < len) t.push_back(p.sampler(t, rng));
    return t;
}

Condition1Audit audit_condition1(const RandomProcess& p, const MembershipOracle& f,
                                 OracleBudget budget, double gamma, double tau,
                                 std::size_t prefixes, RngStream rng) {
    double eps_root = exact_partial_expectation(p, f, {});
    double floor_est = std::exp(-tau) * eps_root;
    auto factory = make_mc_oracle(p, &f, budget);
    Condition1Audit audit;
    RngStream prefix_rng = rng.child("prefix");
    for (std::size_t s = 0; audit.checked < prefixes; ++s) {
        if (s > prefixes * 50 + 1000)
            throw std::runtime_error("audit_condition1: could not sample enough prefixes");
        std::size_t len = static_cast<std::size_t>(prefix_rng.uniform_below(p.n + 1));
        Trajectory prefix = random_prefix(p, len, prefix_rng);
        double f_hat = exact_partial_expectation(p, f, prefix);
        if (f_hat < floor_est) continue;
        auto run = factory->make_run(rng.child(s));
        double f_tilde = run->eval(prefix);
        ++audit.checked;
        if (f_tilde > 0.0 && std::fabs(std::log(f_tilde) - std::log(f_hat)) <= gamma) ++audit.ok;
    }
    return audit;
}

Condition3Audit audit_condition3(const RandomProcess& p, const MembershipOracle& f,
                                 OracleBudget budget, double gamma, std::size_t prefixes,
                                 std::size_t draws, RngStream rng) {
    auto factory = make_mc_oracle(p, &f, budget);
    Condition3Audit audit;
    RngStream prefix_rng = rng.child("prefix");
    for (std::size_t s = 0; s < prefixes; ++s) {
        std::size_t len = static_cast<std::size_t>(prefix_rng.uniform_below(p.n));
        Trajectory prefix = random_prefix(p, len, prefix_rng);
        auto run = factory->make_run(rng.child(s));
        double f_star = run->max_block(prefix).second;
        double f_tilde = run->eval(prefix);
        RngStream draw_rng = rng.child("draw").child(s);
        Trajectory ext = prefix;
        ext.push_back(0.0);
        std::size_t violations = 0;
        for (std::size_t d = 0; d < draws; ++d) {
            ext.back() = p.sampler(prefix, draw_rng);
            if (run->eval(ext) > f_star) ++violations;
        }
        audit.violation_rate.push_back(static_cast<double>(violations) /
                                       static_cast<double>(draws));
        audit.bound.push_back(2.0 * gamma * f_tilde);
    }
    return audit;
}

std::shared_ptr<OracleFactory> make_exact_oracle(RandomProcess p, const MembershipOracle* f,
                                                 std::size_t cap) {
    return std::make_shared<ExactFactory>(std::move(p), f, cap);
}

std::shared_ptr<OracleFactory> make_threshold_oracle(ThresholdSpec spec) {
    return std::make_shared<ThresholdFactory>(std::move(spec));
}

std::shared_ptr<OracleFactory> make_mc_oracle(RandomProcess p, const MembershipOracle* f,
                                              OracleBudget budget) {
    return std::make_shared<McFactory>(std::move(p), f, budget);
}

}  // namespace ccm
