#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "masksim/epidemic.hpp"
#include "masksim/errors.hpp"
#include "masksim/graph.hpp"
#include "masksim/rng.hpp"

namespace masksim {

struct CalibrationResult {
    double lambda = 1.0;
    double achieved_r0_network = 0.0;
    std::size_t iterations = 0;
};

enum class CalibrationKernel {
    /// Per-edge infection probability 1 - (1 - lambda*w)^d_inf with a fixed
    /// integer horizon d_inf.
    FixedHorizon,
    /// Exact expectation under the engine's geometric state durations,
    /// via the duration probability generating function.
    GeometricDurations,
};

/// First-order expected secondary infections from a typical index case:
/// mean over nodes i of sum over neighbors j of 1 - (1 - lambda*w_ij)^d_inf.
inline double expected_secondary_infections(const ContactGraph& g, double lambda, double d_inf) {
    if (d_inf < 1.0) throw ContractViolation("expected_secondary_infections: d_inf must be >= 1");
    if (lambda < 0.0) throw ContractViolation("expected_secondary_infections: lambda must be >= 0");
    if (lambda * g.max_weight() > 1.0 + 1e-12)
        throw ContractViolation("expected_secondary_infections: lambda scales a weight above 1");
    if (g.n_nodes == 0) return 0.0;
    double total = 0.0;
    for (const auto& e : g.edges)
        total += 2.0 * (1.0 - std::pow(1.0 - lambda * e.weight, d_inf));
    return total / static_cast<double>(g.n_nodes);
}

namespace detail {

// E[x^D] for D geometric on {1,2,...} with per-day exit probability q.
inline double geometric_pgf(double x, double q) {
    if (q >= 1.0) return x;
    return q * x / (1.0 - (1.0 - q) * x);
}

// P(edge with per-day probability p ever fires over an infectious period
// drawn as presymptomatic + (a)symptomatic geometric stages).
inline double edge_infection_probability_geometric(double p, const DiseaseParams& params) {
    const double x = 1.0 - p;
    const double pre = geometric_pgf(x, 1.0 / params.mean_presymp_days);
    const double branch = params.p_asymptomatic * geometric_pgf(x, 1.0 / params.mean_asymp_days) +
                          (1.0 - params.p_asymptomatic) * geometric_pgf(x, 1.0 / params.mean_symp_days);
    return 1.0 - pre * branch;
}

} // namespace detail

/// Expected secondary infections with the infectious period integrated over
/// the engine's geometric stage durations (the duration-exact kernel).
inline double expected_secondary_infections_geometric(const ContactGraph& g, double lambda,
                                                      const DiseaseParams& params) {
    if (lambda < 0.0) throw ContractViolation("expected_secondary_infections_geometric: lambda must be >= 0");
    if (lambda * g.max_weight() > 1.0 + 1e-12)
        throw ContractViolation("expected_secondary_infections_geometric: lambda scales a weight above 1");
    if (g.n_nodes == 0) return 0.0;
    double total = 0.0;
    for (const auto& e : g.edges)
        total += 2.0 * detail::edge_infection_probability_geometric(lambda * e.weight, params);
    return total / static_cast<double>(g.n_nodes);
}

/// Bisection on the uniform edge-weight scale lambda in (0, 1/max_weight]
/// until the network channel delivers (1 - mix_fraction) * r0 expected
/// secondary infections within tol. Returns the scaled graph and the fit.
inline std::pair<ContactGraph, CalibrationResult>
calibrate_to_r0(const ContactGraph& g, const DiseaseParams& params, double tol = 0.01,
                CalibrationKernel kernel = CalibrationKernel::GeometricDurations) {
    params.validate();
    if (tol <= 0.0) throw ConfigError("calibrate_to_r0: tol must be > 0");
    const double target = (1.0 - params.mix_fraction) * params.r0;

    auto objective = [&](double lambda) {
        return kernel == CalibrationKernel::GeometricDurations
                   ? expected_secondary_infections_geometric(g, lambda, params)
                   : expected_secondary_infections(g, lambda, params.expected_infectious_days());
    };

    if (g.edges.empty()) {
        if (target > tol)
            throw CalibrationError("calibrate_to_r0: graph has no edges; network ceiling 0 < target " +
                                   std::to_string(target));
        return {g, CalibrationResult{1.0, 0.0, 0}};
    }

    const double lambda_max = 1.0 / g.max_weight();
    const double ceiling = objective(lambda_max);
    CalibrationResult res;
    if (std::abs(ceiling - target) <= tol) {
        res = {lambda_max, ceiling, 0};
        return {g.scaled(lambda_max), res};
    }
    if (ceiling < target)
        throw CalibrationError("calibrate_to_r0: network target " + std::to_string(target) +
                               " exceeds attainable ceiling " + std::to_string(ceiling) +
                               " at lambda_max = " + std::to_string(lambda_max));

    double lo = 0.0, hi = lambda_max;
    double mid = 0.0, value = 0.0;
    std::size_t iterations = 0;
    // The objective is strictly increasing in lambda, so this converges.
    for (; iterations < 200; ++iterations) {
        mid = 0.5 * (lo + hi);
        value = objective(mid);
        if (std::abs(value - target) <= tol) break;
        if (value < target)
            lo = mid;
        else
            hi = mid;
    }
    if (std::abs(value - target) > tol)
        throw CalibrationError("calibrate_to_r0: bisection failed to reach tol");
    res = {mid, value, iterations + 1};
    return {g.scaled(mid), res};
}

struct R0Estimate {
    double total = 0.0;
    double network = 0.0;
    double mixing = 0.0;
    std::size_t trials = 0;
};

/// Monte-Carlo R0: mean direct infections caused by one random index case
/// before recovery, on a calibrated graph, everyone else held susceptible
/// (infected nodes are marked so they are counted once and never transmit).
inline R0Estimate estimate_r0_breakdown(const ContactGraph& g, const DiseaseParams& params,
                                        std::size_t n_trials, std::uint64_t seed) {
    if (n_trials < 1) throw ContractViolation("estimate_r0_empirical: n_trials must be >= 1");
    params.validate();
    const std::size_t n = g.n_nodes;
    if (n < 1) throw ContractViolation("estimate_r0_empirical: graph has no nodes");

    const RngFactory factory(seed);
    const double mix_rate = params.mix_fraction * params.r0 / params.expected_infectious_days();

    std::vector<std::uint32_t> infected_stamp(n, 0);
    std::uint64_t network_total = 0, mixing_total = 0;

    for (std::uint32_t trial = 1; trial <= n_trials; ++trial) {
        RngStream rng = factory.stream(streams::r0_trial, trial);
        const auto index_case = static_cast<NodeId>(rng.uniform_below(n));
        infected_stamp[index_case] = trial;
        std::size_t infected_count = 1; // index case occupies one slot

        // Infectious period: presymptomatic stage then one (a)symptomatic stage.
        const std::uint64_t d_pre = rng.geometric_trials(1.0 / params.mean_presymp_days);
        const bool asymp = rng.bernoulli(params.p_asymptomatic);
        const std::uint64_t d_post = rng.geometric_trials(
            1.0 / (asymp ? params.mean_asymp_days : params.mean_symp_days));
        const std::uint64_t duration = d_pre + d_post;

        for (std::uint64_t day = 0; day < duration; ++day) {
            for (const auto& nb : g.adjacency[index_case]) {
                if (rng.bernoulli(nb.weight) && infected_stamp[nb.id] != trial) {
                    infected_stamp[nb.id] = trial;
                    ++infected_count;
                    ++network_total;
                }
            }
            if (params.mix_fraction > 0.0 && infected_count < n) {
                const double susceptibles = static_cast<double>(n - infected_count);
                const double expected = mix_rate * susceptibles / static_cast<double>(n);
                const std::uint64_t imports = rng.poisson(expected);
                for (std::uint64_t k = 0; k < imports && infected_count < n; ++k) {
                    // Uniform over the remaining susceptibles, by rejection.
                    NodeId target;
                    do {
                        target = static_cast<NodeId>(rng.uniform_below(n));
                    } while (infected_stamp[target] == trial);
                    infected_stamp[target] = trial;
                    ++infected_count;
                    ++mixing_total;
                }
            }
        }
    }

    R0Estimate est;
    est.trials = n_trials;
    est.network = static_cast<double>(network_total) / static_cast<double>(n_trials);
    est.mixing = static_cast<double>(mixing_total) / static_cast<double>(n_trials);
    est.total = est.network + est.mixing;
    return est;
}

inline double estimate_r0_empirical(const ContactGraph& g, const DiseaseParams& params,
                                    std::size_t n_trials, std::uint64_t seed) {
    return estimate_r0_breakdown(g, params, n_trials, seed).total;
}

} // namespace masksim
