#pragma once

#include "modone/localstats.hpp"
#include "modone/oscint.hpp"
#include "modone/seqgen.hpp"
#include "modone/window.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

namespace modone {

// ============================================================================
// Ensemble experiments over the exponent interval J = [A, A+1]: draw alphas,
// evaluate the k-level correlation sum at each, and estimate its expectation
// and variance as functions of N, together with a log-log fit of the variance
// decay exponent.
//
// Every estimate is a pure function of (plan, N). The alpha stream is indexed
// by sample only, so all the N in a plan's grid see the same draws, and the
// working precision is provisioned once for the largest N of the grid, so a
// shorter run is literally a prefix of a longer one.
// ============================================================================

struct ExperimentPlan {
    int k = 2;
    AlphaInterval J{8.0};
    std::vector<std::uint64_t> N_grid;  // strictly increasing
    int samples = 2;                    // alpha draws per N, >= 2
    std::uint64_t seed = 0;
    Window window;
    double beta = 1.0;

    // testing controls: alpha_span scales the draw width below the interval's
    // unit length (0 collapses the stream to the point mass at A), and
    // fixed_points substitutes one caller-supplied point set for every draw
    double alpha_span = 1.0;
    std::shared_ptr<const PointSet> fixed_points;

    void validate() const;

    // the N every precision decision is provisioned for
    std::uint64_t reference_n() const;

    // draw for one sample index, identical across the whole grid
    double alpha_at(int sample) const;
};

struct ExpectationEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    double reference = 0.0;     // C_k(N) times the window integral
};

struct VarianceEstimate {
    double var = 0.0;
    double std_error = 0.0;     // jackknife standard error of the mean of squares
};

struct DecayFit {
    double rho_hat = 0.0;       // negated slope of the log-log least squares line
    double intercept = 0.0;
    std::vector<double> residuals;
    std::vector<std::uint64_t> N_grid;
};

// Sample mean of R_k(f, alpha_i, N) over the plan's draws, with its standard
// error and the fixed reference the variance is centered at.
ExpectationEstimate expectation_estimate(const ExperimentPlan& plan, std::uint64_t N,
                                         int threads = 1);

// Monte-Carlo estimate of the integral over J of (R_k - C_k(N) Int f)^2: the
// squared deviations are taken from the fixed reference, never the sample
// mean. Requires a smooth window kind.
VarianceEstimate variance_estimate(const ExperimentPlan& plan, std::uint64_t N, int threads = 1);

// Least squares on (log N, log var); rho_hat is the negated slope.
DecayFit decay_fit(const std::vector<std::pair<std::uint64_t, double>>& pairs);

// floor(m^(2/rho)) for m = 1..m_max, deduplicated ascending
std::vector<std::uint64_t> nm_schedule(double rho, std::uint64_t m_max);

// One full sweep over the plan's grid: per-N expectation and variance plus the
// decay fit of the variances. Point sets are generated once per draw at the
// grid's largest N and prefixed, which reproduces the per-N estimators above
// bit for bit.
struct ExperimentResult {
    ExperimentPlan plan;
    std::vector<ExpectationEstimate> expectation;   // parallel to plan.N_grid
    std::vector<VarianceEstimate> variance;
    DecayFit fit;
    double wall_seconds = 0.0;
};

ExperimentResult run_experiment(const ExperimentPlan& plan, int threads = 1);

// rows of (N, variance, stderr) for plotting
void write_variance_csv(const ExperimentResult& result, std::ostream& out);

// full manifest: plan, per-N estimates, fit, library version, wall clock
void write_experiment_json(const ExperimentResult& result, std::ostream& out);

// Recover a plan from a manifest (or a bare plan object), so a run can be
// repeated from its own artifact. The fixed_points testing hook has no
// manifest representation.
ExperimentPlan read_plan_json(std::istream& in);

}
