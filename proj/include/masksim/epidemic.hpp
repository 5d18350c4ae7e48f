#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "masksim/errors.hpp"
#include "masksim/graph.hpp"
#include "masksim/rng.hpp"

namespace masksim {

enum class HealthState : std::uint8_t {
    Susceptible,
    Exposed,
    PresympInfectious,
    SympInfectious,
    AsympInfectious,
    Recovered,
};

inline const char* to_string(HealthState s) {
    switch (s) {
        case HealthState::Susceptible: return "S";
        case HealthState::Exposed: return "E";
        case HealthState::PresympInfectious: return "P";
        case HealthState::SympInfectious: return "I";
        case HealthState::AsympInfectious: return "A";
        case HealthState::Recovered: return "R";
    }
    return "?";
}

inline bool is_infectious(HealthState s) {
    return s == HealthState::PresympInfectious || s == HealthState::SympInfectious ||
           s == HealthState::AsympInfectious;
}

struct AgentHealth {
    HealthState state = HealthState::Susceptible;
    std::uint16_t immunity_days_left = 0;
};

/// True = masked this day.
using MaskVector = std::vector<std::uint8_t>;

struct DiseaseParams {
    double mean_exposed_days = 2.0;
    double mean_presymp_days = 3.0;
    double mean_symp_days = 8.0;
    double mean_asymp_days = 8.0;
    std::uint16_t immunity_days = 75;
    double p_asymptomatic = 0.2;
    double r0 = 5.0;
    double mix_fraction = 0.2;
    double initial_exposed_fraction = 0.01;
    double masking_effectiveness = 0.8;
    /// When true immunity expires geometrically with mean immunity_days
    /// instead of a fixed countdown.
    bool geometric_immunity = false;

    /// Expected infectious days; also the horizon used by the mixing-rate and
    /// fixed-horizon calibration kernels.
    double expected_infectious_days() const {
        return mean_presymp_days +
               p_asymptomatic * mean_asymp_days + (1.0 - p_asymptomatic) * mean_symp_days;
    }

    void validate() const {
        auto in01 = [](double x) { return x >= 0.0 && x <= 1.0; };
        if (mean_exposed_days < 1.0 || mean_presymp_days < 1.0 || mean_symp_days < 1.0 ||
            mean_asymp_days < 1.0)
            throw ConfigError("disease: all mean state durations must be >= 1 day");
        if (!in01(p_asymptomatic)) throw ConfigError("disease: p_asymptomatic outside [0, 1]");
        if (!in01(mix_fraction) || mix_fraction >= 1.0)
            throw ConfigError("disease: mix_fraction outside [0, 1)");
        if (!in01(initial_exposed_fraction))
            throw ConfigError("disease: initial_exposed_fraction outside [0, 1]");
        if (!in01(masking_effectiveness))
            throw ConfigError("disease: masking_effectiveness outside [0, 1]");
        if (r0 <= 0.0) throw ConfigError("disease: r0 must be > 0");
    }
};

/// Exactly round(initial_exposed_fraction * n) uniformly chosen agents start
/// Exposed (round half away from zero); everyone else Susceptible.
inline std::vector<AgentHealth> seed_outbreak(std::size_t n, const DiseaseParams& params,
                                              RngStream& rng) {
    if (n < 1) throw ContractViolation("seed_outbreak: n must be >= 1");
    std::vector<AgentHealth> health(n);
    const auto k = static_cast<std::uint32_t>(
        std::llround(params.initial_exposed_fraction * static_cast<double>(n)));
    for (const auto idx : rng.sample_without_replacement(static_cast<std::uint32_t>(n), k))
        health[idx].state = HealthState::Exposed;
    return health;
}

/// Per-edge attenuation: (1 - effectiveness)^(number of masked endpoints).
inline double transmission_multiplier(bool masked_src, bool masked_dst, double effectiveness) {
    const double f = 1.0 - effectiveness;
    return (masked_src ? f : 1.0) * (masked_dst ? f : 1.0);
}

/// RNG streams consumed by one day of simulation, in a fixed order:
/// network draws in canonical edge order, then mixing, then progression in
/// agent order.
struct DayStreams {
    RngStream network;
    RngStream mixing;
    RngStream progression;

    static DayStreams derive(const RngFactory& factory, std::uint64_t replicate,
                             std::uint64_t day) {
        return {factory.stream(streams::network_transmission, replicate, day),
                factory.stream(streams::mixing_transmission, replicate, day),
                factory.stream(streams::progression, replicate, day)};
    }
};

struct StepResult {
    std::vector<NodeId> new_infections; // ascending ids, become Exposed next day
    std::size_t network_infections = 0;
    std::size_t mixing_infections = 0;
};

/// One synchronous day: network transmission over edges, Poisson random-mixing
/// imports, then state progression, all evaluated against a snapshot of the
/// morning states. Newly infected agents are Exposed from the next day.
inline StepResult step_day(std::vector<AgentHealth>& health, const MaskVector& masks,
                           const ContactGraph& g, const DiseaseParams& params,
                           DayStreams& streams) {
    const std::size_t n = g.n_nodes;
    if (health.size() != n || masks.size() != n)
        throw ContractViolation("step_day: vector sizes must equal n_nodes");

    const double eff = params.masking_effectiveness;
    std::vector<HealthState> snapshot(n);
    for (std::size_t i = 0; i < n; ++i) snapshot[i] = health[i].state;

    std::vector<char> infected_today(n, 0);
    StepResult result;

    // Network channel, canonical edge order.
    for (const auto& e : g.edges) {
        const bool u_inf = is_infectious(snapshot[e.u]);
        const bool v_inf = is_infectious(snapshot[e.v]);
        const bool u_sus = snapshot[e.u] == HealthState::Susceptible;
        const bool v_sus = snapshot[e.v] == HealthState::Susceptible;
        NodeId target;
        if (u_inf && v_sus)
            target = e.v;
        else if (v_inf && u_sus)
            target = e.u;
        else
            continue;
        const double p = e.weight * transmission_multiplier(masks[e.u], masks[e.v], eff);
        if (streams.network.bernoulli(p) && !infected_today[target]) {
            infected_today[target] = 1;
            ++result.network_infections;
        }
    }

    // Random-mixing channel: Poisson imports proportional to aggregate
    // mask-attenuated infectious pressure, assigned to susceptibles weighted
    // by their own attenuation.
    if (params.mix_fraction > 0.0) {
        double infectious_pressure = 0.0;
        double susceptible_weight = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double f = masks[i] ? 1.0 - eff : 1.0;
            if (is_infectious(snapshot[i]))
                infectious_pressure += f;
            else if (snapshot[i] == HealthState::Susceptible)
                susceptible_weight += f;
        }
        const double rate = params.mix_fraction * params.r0 / params.expected_infectious_days();
        const double expected = rate * infectious_pressure * susceptible_weight /
                                static_cast<double>(n);
        const std::uint64_t imports = streams.mixing.poisson(expected);
        if (imports > 0 && susceptible_weight > 0.0) {
            std::vector<NodeId> sus_ids;
            std::vector<double> cumulative;
            sus_ids.reserve(n);
            cumulative.reserve(n);
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (snapshot[i] != HealthState::Susceptible) continue;
                acc += masks[i] ? 1.0 - eff : 1.0;
                sus_ids.push_back(static_cast<NodeId>(i));
                cumulative.push_back(acc);
            }
            for (std::uint64_t k = 0; k < imports; ++k) {
                const double x = streams.mixing.uniform() * acc;
                const auto it = std::lower_bound(cumulative.begin(), cumulative.end(), x);
                const NodeId target = sus_ids[it - cumulative.begin()];
                if (!infected_today[target]) {
                    infected_today[target] = 1;
                    ++result.mixing_infections;
                }
            }
        }
    }

    // Progression from the snapshot, agent order.
    for (std::size_t i = 0; i < n; ++i) {
        auto& agent = health[i];
        switch (snapshot[i]) {
            case HealthState::Susceptible:
                break;
            case HealthState::Exposed:
                if (streams.progression.bernoulli(1.0 / params.mean_exposed_days))
                    agent.state = HealthState::PresympInfectious;
                break;
            case HealthState::PresympInfectious:
                if (streams.progression.bernoulli(1.0 / params.mean_presymp_days))
                    agent.state = streams.progression.bernoulli(params.p_asymptomatic)
                                      ? HealthState::AsympInfectious
                                      : HealthState::SympInfectious;
                break;
            case HealthState::SympInfectious:
                if (streams.progression.bernoulli(1.0 / params.mean_symp_days)) {
                    agent.state = HealthState::Recovered;
                    agent.immunity_days_left = params.immunity_days;
                }
                break;
            case HealthState::AsympInfectious:
                if (streams.progression.bernoulli(1.0 / params.mean_asymp_days)) {
                    agent.state = HealthState::Recovered;
                    agent.immunity_days_left = params.immunity_days;
                }
                break;
            case HealthState::Recovered:
                if (params.geometric_immunity) {
                    if (streams.progression.bernoulli(1.0 / params.immunity_days)) {
                        agent.state = HealthState::Susceptible;
                        agent.immunity_days_left = 0;
                    }
                } else if (agent.immunity_days_left <= 1) {
                    agent.state = HealthState::Susceptible;
                    agent.immunity_days_left = 0;
                } else {
                    --agent.immunity_days_left;
                }
                break;
        }
    }

    for (NodeId i = 0; i < n; ++i) {
        if (infected_today[i]) {
            health[i].state = HealthState::Exposed;
            health[i].immunity_days_left = 0;
            result.new_infections.push_back(i);
        }
    }
    return result;
}

} // namespace masksim
