// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sift/errors.hpp"

namespace sift {
namespace bufferbox {

constexpr std::size_t kFractions = 3; // medium, coarse, fine SPM
constexpr double kSecondsPerDay = 86400.0;

/// Per-fraction deposition/erosion parameters plus the two global sandy-layer
/// parameters. Time unit is days throughout; the pick-up factor is stored as
/// given (kg/m^2/s) and converted on use.
struct Params {
    std::array<double, kFractions> v_sed{};    // settling velocity, m/day
    std::array<double, kFractions> fr_sed2{};  // fraction of settling routed to S2
    std::array<double, kFractions> v_res{};    // S1 resuspension rate, 1/day
    std::array<double, kFractions> tau_cr1{};  // S1 critical shear stress, Pa
    double fact_pup = 0.0;                     // S2 pick-up factor, kg/m^2/s
    double tau_shields = 0.0;                  // S2 critical shear stress, Pa

    static Params baseline() {
        Params p;
        p.v_sed = {10.8, 86.4, 0.1};
        p.fr_sed2 = {0.15, 0.15, 0.15};
        p.v_res = {0.2, 1.0, 1.0};
        p.tau_cr1 = {0.1, 0.1, 0.1};
        p.fact_pup = 3e-8;
        p.tau_shields = 0.8;
        return p;
    }

    void validate() const {
        for (std::size_t i = 0; i < kFractions; ++i) {
            if (v_sed[i] <= 0) throw ConfigError("bufferbox: v_sed must be positive");
            if (fr_sed2[i] <= 0 || fr_sed2[i] >= 1) throw ConfigError("bufferbox: fr_sed2 must be in (0, 1)");
            if (v_res[i] < 0) throw ConfigError("bufferbox: v_res must be nonnegative");
            if (tau_cr1[i] <= 0) throw ConfigError("bufferbox: tau_cr1 must be positive");
        }
        if (fact_pup < 0) throw ConfigError("bufferbox: fact_pup must be nonnegative");
        if (tau_shields <= 0) throw ConfigError("bufferbox: tau_shields must be positive");
    }
};

/// Water column + two bed layers, per fraction. c in g/m^3, masses in g/m^2.
struct BoxState {
    std::array<double, kFractions> c{};
    std::array<double, kFractions> m1{};
    std::array<double, kFractions> m2{};
    double t = 0.0; // days
};

/// Semidiurnal tidal shear stress with one storm plateau on top.
struct TidalForcing {
    double tide_amplitude = 0.35;  // Pa
    double tide_period = 0.5175;   // days
    double storm_start = 15.0;     // day
    double storm_days = 2.0;
    double storm_tau = 1.2;        // Pa added during the storm

    double tau(double t) const {
        double v = tide_amplitude * std::fabs(std::sin(2.0 * std::numbers::pi * t / tide_period));
        if (t >= storm_start && t < storm_start + storm_days) v += storm_tau;
        return v;
    }

    void validate() const {
        if (tide_amplitude < 0 || storm_tau < 0) throw ConfigError("forcing: shear stress must be nonnegative");
        if (tide_period <= 0) throw ConfigError("forcing: tide_period must be positive");
        if (storm_days < 0) throw ConfigError("forcing: storm_days must be nonnegative");
    }
};

/// Deposition fluxes towards S1 and S2 in g/m^2/day:
/// D1 = (1-Fr) * V_sed * C,  D2 = Fr * V_sed * C.
struct DepositionFlux {
    std::array<double, kFractions> d1{};
    std::array<double, kFractions> d2{};
};

inline DepositionFlux deposition_fluxes(const Params& p, const BoxState& s) {
    DepositionFlux f;
    for (std::size_t i = 0; i < kFractions; ++i) {
        f.d1[i] = (1.0 - p.fr_sed2[i]) * p.v_sed[i] * s.c[i];
        f.d2[i] = p.fr_sed2[i] * p.v_sed[i] * s.c[i];
    }
    return f;
}

/// S1 (fluffy layer) erosion, g/m^2/day: E1 = V_res * M1 * (tau/tau_cr - 1),
/// clamped at zero below the critical stress.
inline std::array<double, kFractions> erosion_flux_s1(const Params& p, const BoxState& s, double tau) {
    std::array<double, kFractions> e{};
    for (std::size_t i = 0; i < kFractions; ++i) {
        const double excess = tau / p.tau_cr1[i] - 1.0;
        e[i] = excess > 0.0 ? p.v_res[i] * s.m1[i] * excess : 0.0;
    }
    return e;
}

/// S2 (sandy buffer) erosion with the sandy-seabed pick-up exponent, per
/// fraction: E2 = Fact_pup * M2 * (tau/tau_Shields - 1)^1.5, converted from
/// per-second to per-day.
inline std::array<double, kFractions> erosion_flux_s2(const Params& p, const BoxState& s, double tau) {
    std::array<double, kFractions> e{};
    const double excess = tau / p.tau_shields - 1.0;
    if (excess <= 0.0) return e;
    const double pickup = p.fact_pup * kSecondsPerDay * std::pow(excess, 1.5);
    for (std::size_t i = 0; i < kFractions; ++i) e[i] = pickup * s.m2[i];
    return e;
}

/// Scenario knobs for a desk-scale run. dt is snapped so one hour is an
/// integer number of steps; halving dt then refines the same sample times.
struct Scenario {
    double depth = 20.0;         // m
    double dt = 0.002;           // days (nominal; snapped to divide one hour)
    double horizon_days = 30.0;
    std::array<double, kFractions> c0{1.0, 1.0, 1.0};
    std::array<double, kFractions> m1_0{50.0, 50.0, 50.0};
    std::array<double, kFractions> m2_0{500.0, 500.0, 500.0};
    TidalForcing forcing;

    int steps_per_hour() const {
        const double per_hour = 1.0 / 24.0 / dt;
        return std::max(1, static_cast<int>(std::lround(per_hour)));
    }

    void validate() const {
        if (depth <= 0) throw ConfigError("scenario: depth must be positive");
        if (dt <= 0) throw ConfigError("scenario: dt must be positive");
        if (horizon_days <= 0) throw ConfigError("scenario: horizon_days must be positive");
        for (double v : c0)
            if (v < 0) throw ConfigError("scenario: initial concentrations must be nonnegative");
        for (double v : m1_0)
            if (v < 0) throw ConfigError("scenario: initial masses must be nonnegative");
        for (double v : m2_0)
            if (v < 0) throw ConfigError("scenario: initial masses must be nonnegative");
        forcing.validate();
    }

    nlohmann::json to_json() const {
        return {{"depth_m", depth},
                {"dt_days", dt},
                {"horizon_days", horizon_days},
                {"c0", c0},
                {"m1_0", m1_0},
                {"m2_0", m2_0},
                {"forcing",
                 {{"tide_amplitude_pa", forcing.tide_amplitude},
                  {"tide_period_days", forcing.tide_period},
                  {"storm_start_day", forcing.storm_start},
                  {"storm_days", forcing.storm_days},
                  {"storm_tau_pa", forcing.storm_tau}}}};
    }

    static Scenario from_json(const nlohmann::json& j) {
        Scenario sc;
        sc.depth = j.value("depth_m", sc.depth);
        sc.dt = j.value("dt_days", sc.dt);
        sc.horizon_days = j.value("horizon_days", sc.horizon_days);
        if (j.contains("c0")) j.at("c0").get_to(sc.c0);
        if (j.contains("m1_0")) j.at("m1_0").get_to(sc.m1_0);
        if (j.contains("m2_0")) j.at("m2_0").get_to(sc.m2_0);
        if (j.contains("forcing")) {
            const auto& f = j.at("forcing");
            sc.forcing.tide_amplitude = f.value("tide_amplitude_pa", sc.forcing.tide_amplitude);
            sc.forcing.tide_period = f.value("tide_period_days", sc.forcing.tide_period);
            sc.forcing.storm_start = f.value("storm_start_day", sc.forcing.storm_start);
            sc.forcing.storm_days = f.value("storm_days", sc.forcing.storm_days);
            sc.forcing.storm_tau = f.value("storm_tau_pa", sc.forcing.storm_tau);
        }
        sc.validate();
        return sc;
    }
};

/// One explicit Euler step with flux limiting: a flux may not remove more
/// mass than its source holds, which keeps every component nonnegative and
/// the box closed for any dt.
inline BoxState step(const Params& p, const BoxState& s, double tau, double dt, double depth) {
    if (dt <= 0) throw ConfigError("bufferbox step: dt must be positive");
    const auto dep = deposition_fluxes(p, s);
    const auto e1 = erosion_flux_s1(p, s, tau);
    const auto e2 = erosion_flux_s2(p, s, tau);

    BoxState next = s;
    next.t = s.t + dt;
    for (std::size_t i = 0; i < kFractions; ++i) {
        const double water = s.c[i] * depth; // areal mass in the column, g/m^2
        double dep1 = dep.d1[i] * dt;
        double dep2 = dep.d2[i] * dt;
        const double dep_total = dep1 + dep2;
        if (dep_total > water && dep_total > 0.0) {
            const double scale = water / dep_total;
            dep1 *= scale;
            dep2 *= scale;
        }
        const double ero1 = std::min(e1[i] * dt, s.m1[i]);
        const double ero2 = std::min(e2[i] * dt, s.m2[i]);

        next.c[i] = (water - dep1 - dep2 + ero1 + ero2) / depth;
        next.m1[i] = s.m1[i] + dep1 - ero1;
        next.m2[i] = s.m2[i] + dep2 - ero2;
        if (next.c[i] < 0 || next.m1[i] < 0 || next.m2[i] < 0)
            throw EvaluationError("bufferbox step: negative state after flux limiting (internal error)");
    }
    return next;
}

/// Hourly surface-SPM series plus run diagnostics.
struct RunResult {
    std::vector<double> hours;                      // sample times, hours from 0
    std::vector<std::array<double, kFractions>> c;  // per-fraction concentration
    std::vector<double> total_c;                    // summed over fractions
    double qoi_mean_c = 0.0;                        // time mean of total_c
    double max_step_mass_drift = 0.0;               // max per-step relative drift
    double mean_e2 = 0.0;                           // time-averaged S2 erosion flux
    double mean_e1 = 0.0;

    void to_csv(std::ostream& out) const {
        out << "hour,c_im1,c_im2,c_im3,c_total\n";
        char buf[160];
        for (std::size_t k = 0; k < hours.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", hours[k], c[k][0], c[k][1],
                          c[k][2], total_c[k]);
            out << buf;
        }
    }
};

inline double total_mass(const BoxState& s, double depth) {
    double m = 0.0;
    for (std::size_t i = 0; i < kFractions; ++i) m += s.c[i] * depth + s.m1[i] + s.m2[i];
    return m;
}

/// Run the box over the scenario horizon with the forcing held constant
/// within each step, sampling the state on every hour (t = 0 included).
inline RunResult run(const Params& params, const Scenario& scenario) {
    params.validate();
    scenario.validate();

    const int sph = scenario.steps_per_hour();
    const double dt = 1.0 / 24.0 / static_cast<double>(sph);
    const auto n_hours = static_cast<std::size_t>(std::lround(scenario.horizon_days * 24.0));

    BoxState state;
    state.c = scenario.c0;
    state.m1 = scenario.m1_0;
    state.m2 = scenario.m2_0;

    RunResult result;
    result.hours.reserve(n_hours + 1);
    result.c.reserve(n_hours + 1);
    result.total_c.reserve(n_hours + 1);

    auto record = [&](const BoxState& s, double hour) {
        result.hours.push_back(hour);
        result.c.push_back(s.c);
        result.total_c.push_back(s.c[0] + s.c[1] + s.c[2]);
    };
    record(state, 0.0);

    const double reference_mass = total_mass(state, scenario.depth);
    double e2_sum = 0.0, e1_sum = 0.0;
    std::size_t n_steps = 0;

    for (std::size_t hour = 0; hour < n_hours; ++hour) {
        for (int k = 0; k < sph; ++k) {
            const double tau = scenario.forcing.tau(state.t);
            const auto e1 = erosion_flux_s1(params, state, tau);
            const auto e2 = erosion_flux_s2(params, state, tau);
            for (std::size_t i = 0; i < kFractions; ++i) {
                e1_sum += e1[i];
                e2_sum += e2[i];
            }
            const double before = total_mass(state, scenario.depth);
            state = step(params, state, tau, dt, scenario.depth);
            const double after = total_mass(state, scenario.depth);
            if (reference_mass > 0.0)
                result.max_step_mass_drift =
                    std::max(result.max_step_mass_drift, std::fabs(after - before) / reference_mass);
            ++n_steps;
        }
        record(state, static_cast<double>(hour + 1));
    }

    double sum = 0.0;
    for (double v : result.total_c) sum += v;
    result.qoi_mean_c = sum / static_cast<double>(result.total_c.size());
    result.mean_e1 = e1_sum / static_cast<double>(n_steps);
    result.mean_e2 = e2_sum / static_cast<double>(n_steps);
    return result;
}

} // namespace bufferbox
} // namespace sift
