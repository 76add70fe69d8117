#ifndef CCM_TAMPER_HPP
#define CCM_TAMPER_HPP

#include <optional>

#include "ccm/core.hpp"
#include "ccm/pexp.hpp"

namespace ccm {

enum class TamperMode { Additive, Multiplicative, MultiplicativeAbort };

struct TamperParams {
    double lambda = 0.0;
    double tau = 0.0;
    double gamma = 0.0;
    double eps = 0.0;    // declared lower bound on the set measure
    double delta = 0.0;  // failure tolerance
    std::optional<double> k_cap;
    TamperMode mode = TamperMode::Multiplicative;
    WeightVector alpha;
    // The abort check can run before the tamper cases or only when the block
    // would otherwise be kept; the default is the latter, which never gives up
    // on a step it could still rescue.
    bool abort_first = false;
    // When set, every tampered-in value is checked against the conditional
    // support of its block (finite domains only).
    bool audit_validity = false;

    void validate(std::size_t n) const;
};

struct StepDecision {
    StepCase step_case = StepCase::Case3;
    double value = 0.0;  // chosen block value v_i
    double f_prev = 0.0, f_star = 0.0, f_ext = 0.0;
};

StepDecision additive_step(RunOracle& oracle, const Trajectory& prefix, double u, double lambda);

StepDecision mucio_step(RunOracle& oracle, const Trajectory& prefix, double u, double lambda,
                        double alpha_i);

StepDecision mucio_abort_step(RunOracle& oracle, const Trajectory& prefix, double u,
                              double lambda, double alpha_i, double tau, double eps_root,
                              bool already_aborted, bool abort_first = false);

// Runs one full online tampering pass.  If external_u is supplied the honest
// blocks are read from it (product processes only); otherwise each honest
// block is drawn conditioned on the tampered prefix.
TamperTranscript run_tampering(const RandomProcess& p, const MembershipOracle& f,
                               const OracleFactory& oracle, const TamperParams& params,
                               RngStream rng, const Trajectory* external_u = nullptr);

// Parameter instantiations.  eps doubles as the root-estimate stand-in in the
// abort-depth formula.
TamperParams average_case_params(std::size_t n, double eps, double delta);
TamperParams worst_case_params(std::size_t n, double eps, double delta);

// Maps a given point of a product measure to a nearby point of S.
Trajectory find_close_point(const RandomProcess& mu, const MembershipOracle& S,
                            const OracleFactory& oracle, const TamperParams& params,
                            const Trajectory& x, RngStream rng);

}  // namespace ccm

#endif
