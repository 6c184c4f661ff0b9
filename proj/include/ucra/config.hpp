#pragma once

// Scenario description: network sizes, channel statistics, constraint
// limits, sensing model and solver knobs.  Values are stored in linear
// units; dB appears only in config keys carrying a _db suffix and is
// converted while parsing.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "ucra/rates.hpp"

namespace ucra {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Which long-term multipliers run and which per-slot caps apply.
// "None" keeps only the transmit-power budget; AP/AC/APC enforce the PU
// limits as long-term averages; IP/IC/IPC enforce them slot-by-slot.
enum class Scheme { None, AP, AC, APC, IP, IC, IPC };

enum class SensingMode { Perfect, Quantized, Detector, NoisyOutdated };

// How observations become the beliefs the allocator sees:
//   Optimal     - posterior tracking (the scheme under study)
//   Truth       - genie point masses at the true state
//   Observation - point masses at the latest raw observation, held between
//                 sensing instants
//   Prior       - stationary distributions, never updated
enum class CsiVariant { Optimal, Truth, Observation, Prior };

enum class ActivityModel { Markov, Iid };
enum class StepSchedule { Constant, Diminishing };

// Reading of the PU rate floor r_floor.  Conditional: the loss target
// applies to slots where the PU transmits.  Unconditional: the floor is
// additionally scaled by the stationary activity probability.
enum class RateFloorMode { Conditional, Unconditional };

struct SchemeFlags {
    bool theta = false;      // long-term interference multiplier active
    bool rho = false;        // long-term capacity-loss multiplier active
    bool cap_interf = false; // instantaneous interference cap active
    bool cap_closs = false;  // instantaneous capacity-loss cap active
};

inline SchemeFlags scheme_flags(Scheme s) {
    switch (s) {
    case Scheme::None: return {false, false, false, false};
    case Scheme::AP:   return {true, false, false, false};
    case Scheme::AC:   return {false, true, false, false};
    case Scheme::APC:  return {true, true, false, false};
    case Scheme::IP:   return {false, false, true, false};
    case Scheme::IC:   return {false, false, false, true};
    case Scheme::IPC:  return {false, false, true, true};
    }
    throw ConfigError("unknown scheme");
}

struct ScenarioConfig {
    int num_sus = 5;
    int num_channels = 10;
    long long horizon = 20000;
    std::uint64_t seed = 1;
    Scheme scheme = Scheme::APC;
    CsiVariant csi = CsiVariant::Optimal;

    // per-SU (size M)
    std::vector<double> priority;     // beta^m
    std::vector<double> power_budget; // long-term average transmit power

    // per-channel (size K)
    std::vector<double> max_interference; // average interference power limit
    std::vector<double> max_cap_loss;     // ergodic capacity loss limit in [0,1]
    std::vector<double> pu_snr;           // PU receive SNR, linear

    // per-link (size K*M, index k*M + m)
    std::vector<double> su_gain_avg; // mean SU->SU gain
    std::vector<double> sp_gain_avg; // mean SU->PU gain
    std::vector<double> sp_corr;     // Gauss-Markov correlation of SU->PU links

    double amp_cap = 100.0;     // amplifier limit on any single transmission
    bool su_gain_fixed = false; // freeze SU gains at their mean (debug scenarios)

    ActivityModel activity_model = ActivityModel::Markov;
    double p11 = 0.975, p10 = 0.025; // PU stays on / turns off
    double p00 = 0.9, p01 = 0.1;     // PU stays off / turns on
    double activity_prob = 0.8;      // iid mode

    SensingMode sensing = SensingMode::Perfect;
    int quantizer_levels = 4;        // L; 0 means unquantized feedback
    double p_fa = 0.03, p_md = 0.02; // detector error rates
    int activity_period = 5;         // slots between detector outputs
    double meas_noise = 0.19905;     // per-component variance of SU->PU pilot noise
    int sense_period = 1;            // slots between SU->PU pilot measurements

    double step_pi = 0.01, step_theta = 0.01, step_rho = 0.01;
    StepSchedule step_schedule = StepSchedule::Constant;
    double mult_clamp = 1e6; // divergence guard on all multipliers

    RateFloorMode rate_floor_mode = RateFloorMode::Conditional;
    int quad_order = 64;

    bool warm_start = false; // seed multipliers from the offline calibrator
    int calib_samples = 2000;
    int calib_iters = 120;
    double calib_step = 0.5;

    int link(int k, int m) const { return k * num_sus + m; }

    double stationary_active() const {
        if (activity_model == ActivityModel::Iid) return activity_prob;
        double denom = p01 + p10;
        return denom > 0.0 ? p01 / denom : activity_prob;
    }

    // PU rate floor for channel k implied by the capacity-loss limit.
    double rate_floor(int k) const {
        double full = pu_rate(pu_snr[k], 0.0);
        double f = (1.0 - max_cap_loss[k]) * full;
        if (rate_floor_mode == RateFloorMode::Unconditional) f *= stationary_active();
        return f;
    }

    static ScenarioConfig defaults(int M, int K) {
        ScenarioConfig c;
        c.num_sus = M;
        c.num_channels = K;
        c.resolve();
        return c;
    }

    // Size unset per-entity fields from scalar defaults.
    void resolve() {
        auto fit = [](std::vector<double>& v, std::size_t n, double def) {
            if (v.empty()) v.assign(n, def);
            else if (v.size() == 1) v.assign(n, v[0]);
            else if (v.size() != n)
                throw ConfigError("field list has " + std::to_string(v.size()) +
                                  " entries, expected " + std::to_string(n));
        };
        std::size_t M = static_cast<std::size_t>(num_sus);
        std::size_t K = static_cast<std::size_t>(num_channels);
        fit(priority, M, 1.0);
        fit(power_budget, M, 1.0);
        fit(max_interference, K, 0.15);
        fit(max_cap_loss, K, 0.05);
        fit(pu_snr, K, 10.0);
        fit(su_gain_avg, K * M, std::pow(10.0, 0.3));
        fit(sp_gain_avg, K * M, 1.0);
        fit(sp_corr, K * M, 0.9);
    }

    void validate() const {
        auto check = [](bool ok, const std::string& msg) {
            if (!ok) throw ConfigError(msg);
        };
        check(num_sus >= 1, "num_sus must be >= 1");
        check(num_channels >= 1, "num_channels must be >= 1");
        check(horizon >= 2, "horizon must be >= 2");
        check(amp_cap > 0.0, "amplifier_cap must be positive");
        check(quad_order >= 4, "quadrature_order must be >= 4");
        check(quantizer_levels >= 0, "quantizer_levels must be >= 0");
        check(activity_period >= 1, "activity_period must be >= 1");
        check(sense_period >= 1, "sense_period must be >= 1");
        check(meas_noise >= 0.0, "measurement_noise must be >= 0");
        check(step_pi >= 0.0 && step_theta >= 0.0 && step_rho >= 0.0,
              "stepsizes must be >= 0");
        check(mult_clamp > 0.0, "multiplier_clamp must be positive");
        auto prob = [&](double p, const char* name) {
            check(p >= 0.0 && p <= 1.0, std::string(name) + " must lie in [0,1]");
        };
        prob(p11, "p11"); prob(p10, "p10"); prob(p00, "p00"); prob(p01, "p01");
        prob(activity_prob, "activity_prob");
        prob(p_fa, "p_fa"); prob(p_md, "p_md");
        check(std::abs(p11 + p10 - 1.0) < 1e-9, "p11 + p10 must equal 1");
        check(std::abs(p00 + p01 - 1.0) < 1e-9, "p00 + p01 must equal 1");
        for (double b : priority) check(b > 0.0, "priority must be positive");
        for (double p : power_budget) check(p > 0.0, "power_budget must be positive");
        for (double p : max_interference) check(p >= 0.0, "max_interference must be >= 0");
        for (double e : max_cap_loss)
            check(e >= 0.0 && e <= 1.0, "max_capacity_loss must lie in [0,1]");
        for (double g : pu_snr) check(g > 0.0, "pu_snr must be positive");
        for (double h : su_gain_avg) check(h > 0.0, "su_gain_avg must be positive");
        for (double h : sp_gain_avg) check(h > 0.0, "sp_gain_avg must be positive");
        for (double r : sp_corr) check(r >= 0.0 && r <= 1.0, "sp_correlation must lie in [0,1]");
    }
};

inline const char* to_string(Scheme s) {
    switch (s) {
    case Scheme::None: return "None";
    case Scheme::AP: return "AP";
    case Scheme::AC: return "AC";
    case Scheme::APC: return "APC";
    case Scheme::IP: return "IP";
    case Scheme::IC: return "IC";
    case Scheme::IPC: return "IPC";
    }
    return "?";
}

inline const char* to_string(CsiVariant v) {
    switch (v) {
    case CsiVariant::Optimal: return "optimal";
    case CsiVariant::Truth: return "truth";
    case CsiVariant::Observation: return "observation";
    case CsiVariant::Prior: return "prior";
    }
    return "?";
}

inline const char* to_string(SensingMode m) {
    switch (m) {
    case SensingMode::Perfect: return "perfect";
    case SensingMode::Quantized: return "quantized";
    case SensingMode::Detector: return "detector";
    case SensingMode::NoisyOutdated: return "noisy_outdated";
    }
    return "?";
}

inline Scheme parse_scheme(const std::string& s) {
    if (s == "None" || s == "none") return Scheme::None;
    if (s == "AP") return Scheme::AP;
    if (s == "AC") return Scheme::AC;
    if (s == "APC") return Scheme::APC;
    if (s == "IP") return Scheme::IP;
    if (s == "IC") return Scheme::IC;
    if (s == "IPC") return Scheme::IPC;
    throw ConfigError("unknown scheme '" + s + "'");
}

inline CsiVariant parse_csi_variant(const std::string& s) {
    if (s == "optimal") return CsiVariant::Optimal;
    if (s == "truth") return CsiVariant::Truth;
    if (s == "observation") return CsiVariant::Observation;
    if (s == "prior") return CsiVariant::Prior;
    throw ConfigError("unknown csi_variant '" + s + "'");
}

inline SensingMode parse_sensing(const std::string& s) {
    if (s == "perfect") return SensingMode::Perfect;
    if (s == "quantized") return SensingMode::Quantized;
    if (s == "detector") return SensingMode::Detector;
    if (s == "noisy_outdated") return SensingMode::NoisyOutdated;
    throw ConfigError("unknown sensing mode '" + s + "'");
}

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& tok, int line) {
    std::string t = trim(tok);
    if (t == "inf" || t == "Inf" || t == "INF")
        return std::numeric_limits<double>::infinity();
    try {
        std::size_t pos = 0;
        double v = std::stod(t, &pos);
        if (pos != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line) + ": bad number '" + t + "'");
    }
}

inline std::vector<double> parse_list(const std::string& val, int line) {
    std::vector<double> out;
    std::stringstream ss(val);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(parse_double(tok, line));
    if (out.empty()) throw ConfigError("line " + std::to_string(line) + ": empty value");
    return out;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

} // namespace detail

// Key/value scenario file: one `key = value` per line, '#' comments,
// comma-separated lists for per-user / per-channel fields, *_db keys in dB.
inline ScenarioConfig parse_config(std::istream& in, const std::string& origin = "<config>") {
    using detail::parse_double;
    using detail::parse_list;
    struct Entry { std::string value; int line; };
    std::unordered_map<std::string, Entry> kv;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + detail::trim(raw) + "'");
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key or value");
        kv[key] = {val, lineno};
    }

    ScenarioConfig c;
    auto take = [&](const char* key) -> const Entry* {
        auto it = kv.find(key);
        if (it == kv.end()) return nullptr;
        return &it->second;
    };
    auto used = std::unordered_map<std::string, bool>{};
    auto geti = [&](const char* key, auto& slot) {
        if (const Entry* e = take(key)) {
            slot = static_cast<std::remove_reference_t<decltype(slot)>>(
                std::llround(parse_double(e->value, e->line)));
            used[key] = true;
        }
    };
    auto getd = [&](const char* key, double& slot) {
        if (const Entry* e = take(key)) { slot = parse_double(e->value, e->line); used[key] = true; }
    };
    auto getlist = [&](const char* key, std::vector<double>& slot, bool db = false) {
        if (const Entry* e = take(key)) {
            slot = parse_list(e->value, e->line);
            if (db) for (double& v : slot) v = detail::db_to_linear(v);
            used[key] = true;
        }
    };
    auto gets = [&](const char* key, std::string& slot) {
        if (const Entry* e = take(key)) { slot = e->value; used[key] = true; }
    };

    geti("num_sus", c.num_sus);
    geti("num_channels", c.num_channels);
    geti("horizon", c.horizon);
    geti("seed", c.seed);

    std::string s;
    gets("scheme", s);
    if (!s.empty()) c.scheme = parse_scheme(s);
    s.clear(); gets("csi_variant", s);
    if (!s.empty()) c.csi = parse_csi_variant(s);
    s.clear(); gets("sensing", s);
    if (!s.empty()) c.sensing = parse_sensing(s);

    getlist("priority", c.priority);
    getlist("power_budget", c.power_budget);
    getlist("max_interference", c.max_interference);
    getlist("max_capacity_loss", c.max_cap_loss);
    getlist("pu_snr", c.pu_snr);
    getlist("pu_snr_db", c.pu_snr, true);
    getlist("su_gain_avg", c.su_gain_avg);
    getlist("su_gain_avg_db", c.su_gain_avg, true);
    getlist("sp_gain_avg", c.sp_gain_avg);
    getlist("sp_gain_avg_db", c.sp_gain_avg, true);
    getlist("sp_correlation", c.sp_corr);
    getd("amplifier_cap", c.amp_cap);

    int fixed = c.su_gain_fixed ? 1 : 0;
    geti("su_gain_fixed", fixed);
    c.su_gain_fixed = fixed != 0;

    s.clear(); gets("activity_model", s);
    if (s == "markov") c.activity_model = ActivityModel::Markov;
    else if (s == "iid") c.activity_model = ActivityModel::Iid;
    else if (!s.empty()) throw ConfigError("unknown activity_model '" + s + "'");
    getd("p11", c.p11); getd("p10", c.p10);
    getd("p00", c.p00); getd("p01", c.p01);
    getd("activity_prob", c.activity_prob);

    std::string lvl;
    gets("quantizer_levels", lvl);
    if (!lvl.empty()) {
        double v = parse_double(lvl, kv["quantizer_levels"].line);
        c.quantizer_levels = std::isinf(v) ? 0 : static_cast<int>(std::llround(v));
    }
    getd("p_fa", c.p_fa);
    getd("p_md", c.p_md);
    geti("activity_period", c.activity_period);
    getd("measurement_noise", c.meas_noise);
    if (const Entry* e = take("measurement_snr_db")) {
        // ratio of mean SU->PU gain to total (two-component) noise power
        double snr = detail::db_to_linear(parse_double(e->value, e->line));
        double hbar = c.sp_gain_avg.empty() ? 1.0 : c.sp_gain_avg[0];
        c.meas_noise = hbar / (2.0 * snr);
        used["measurement_snr_db"] = true;
    }
    geti("sense_period", c.sense_period);

    getd("step_pi", c.step_pi);
    getd("step_theta", c.step_theta);
    getd("step_rho", c.step_rho);
    s.clear(); gets("step_schedule", s);
    if (s == "constant") c.step_schedule = StepSchedule::Constant;
    else if (s == "diminishing") c.step_schedule = StepSchedule::Diminishing;
    else if (!s.empty()) throw ConfigError("unknown step_schedule '" + s + "'");
    getd("multiplier_clamp", c.mult_clamp);

    s.clear(); gets("rate_floor", s);
    if (s == "conditional") c.rate_floor_mode = RateFloorMode::Conditional;
    else if (s == "unconditional") c.rate_floor_mode = RateFloorMode::Unconditional;
    else if (!s.empty()) throw ConfigError("unknown rate_floor '" + s + "'");
    geti("quadrature_order", c.quad_order);

    int warm = c.warm_start ? 1 : 0;
    geti("warm_start", warm);
    c.warm_start = warm != 0;
    geti("calib_samples", c.calib_samples);
    geti("calib_iters", c.calib_iters);
    getd("calib_step", c.calib_step);

    for (const auto& [key, entry] : kv)
        if (!used.count(key))
            throw ConfigError(origin + ":" + std::to_string(entry.line) +
                              ": unknown key '" + key + "'");

    c.resolve();
    c.validate();
    return c;
}

inline ScenarioConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    return parse_config(f, path);
}

} // namespace ucra
