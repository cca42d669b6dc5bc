#include "plab/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plab/errors.hpp"

namespace plab {

using nlohmann::json;

double Profile::at(double s) const noexcept {
    s = std::clamp(s, 0.0, 1.0);
    switch (shape) {
        case ProfileShape::Constant: return from;
        case ProfileShape::Linear: return from + (to - from) * s;
        case ProfileShape::Smoothstep: return from + (to - from) * s * s * (3.0 - 2.0 * s);
    }
    return from;
}

namespace {

void check_profile(const Profile& p, const std::string& where) {
    if (!std::isfinite(p.from) || !std::isfinite(p.to)) throw ValidationError(where, "non-finite value");
    if (p.from < 0.0 || p.end() < 0.0) throw ValidationError(where, "couplings must be >= 0");
}

bool joins(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

ControlSchedule::ControlSchedule(std::vector<Stage> stages) : stages_(std::move(stages)) {
    for (std::size_t i = 0; i < stages_.size(); ++i) {
        const auto& st = stages_[i];
        const std::string where = "schedule[" + std::to_string(i) + "]";
        if (!std::isfinite(st.duration) || st.duration < 0.0)
            throw ValidationError(where + ".duration", "must be finite and >= 0");
        check_profile(st.omega_R, where + ".omega_R");
        check_profile(st.omega_L, where + ".omega_L");
        if (i > 0 && st.flag != StageFlag::Fast) {
            const auto& prev = stages_[i - 1];
            if (!joins(prev.omega_R.end(), st.omega_R.start()) || !joins(prev.omega_L.end(), st.omega_L.start()))
                throw ValidationError(where, "discontinuous controls at stage start (flag the stage \"fast\" to allow a jump)");
        }
    }
}

double ControlSchedule::total_duration() const noexcept {
    double t = 0.0;
    for (const auto& s : stages_) t += s.duration;
    return t;
}

double ControlSchedule::stage_start(std::size_t i) const noexcept {
    double t = 0.0;
    for (std::size_t j = 0; j < i && j < stages_.size(); ++j) t += stages_[j].duration;
    return t;
}

ControlSample ControlSchedule::sample(double t) const noexcept {
    if (stages_.empty()) return {0.0, 0.0};
    double start = 0.0;
    for (const auto& st : stages_) {
        const double end = start + st.duration;
        if (st.duration > 0.0 && t >= start && t < end) {
            const double s = (t - start) / st.duration;
            return {st.omega_R.at(s), st.omega_L.at(s)};
        }
        start = end;
    }
    if (t < 0.0) return initial();
    return final();
}

ControlSample ControlSchedule::initial() const noexcept {
    if (stages_.empty()) return {0.0, 0.0};
    // leading zero-duration stages are instantaneous settings
    std::size_t i = 0;
    while (i + 1 < stages_.size() && stages_[i].duration == 0.0) ++i;
    if (i > 0) return {stages_[i - 1].omega_R.end(), stages_[i - 1].omega_L.end()};
    return {stages_[0].omega_R.start(), stages_[0].omega_L.start()};
}

ControlSample ControlSchedule::final() const noexcept {
    if (stages_.empty()) return {0.0, 0.0};
    return {stages_.back().omega_R.end(), stages_.back().omega_L.end()};
}

double ControlSchedule::max_omega_total() const noexcept {
    double m = 0.0;
    for (const auto& st : stages_) {
        // profiles are monotone, so the extremes sit at the endpoints
        for (double s : {0.0, 1.0}) m = std::max(m, std::hypot(st.omega_R.at(s), st.omega_L.at(s)));
    }
    return m;
}

ControlSchedule ControlSchedule::with_ramp_time(double T) const {
    auto stages = stages_;
    for (auto& st : stages) {
        const bool varies = st.omega_R.start() != st.omega_R.end() || st.omega_L.start() != st.omega_L.end();
        if (st.flag == StageFlag::Adiabatic && varies) st.duration = T;
    }
    return ControlSchedule(std::move(stages));
}

// ---------------------------------------------------------------- JSON

namespace {

std::string shape_name(ProfileShape s) {
    switch (s) {
        case ProfileShape::Constant: return "constant";
        case ProfileShape::Linear: return "linear";
        case ProfileShape::Smoothstep: return "smoothstep";
    }
    return "constant";
}

json profile_json(const Profile& p) {
    json j = {{"shape", shape_name(p.shape)}, {"from", p.from}};
    if (p.shape != ProfileShape::Constant) j["to"] = p.to;
    return j;
}

Profile profile_from(const json& j, const std::string& where) {
    if (j.is_number()) return Profile::constant(j.get<double>());
    if (!j.is_object()) throw ValidationError(where, "must be an object or a number");
    Profile p;
    const std::string shape = j.value("shape", std::string("constant"));
    if (shape == "constant") p.shape = ProfileShape::Constant;
    else if (shape == "linear") p.shape = ProfileShape::Linear;
    else if (shape == "smoothstep") p.shape = ProfileShape::Smoothstep;
    else throw ValidationError(where + ".shape", "unknown shape '" + shape + "'");
    if (!j.contains("from") || !j.at("from").is_number()) throw ValidationError(where + ".from", "missing number");
    p.from = j.at("from").get<double>();
    if (p.shape == ProfileShape::Constant) {
        p.to = p.from;
    } else {
        if (!j.contains("to") || !j.at("to").is_number()) throw ValidationError(where + ".to", "missing number");
        p.to = j.at("to").get<double>();
    }
    return p;
}

}  // namespace

json to_json(const ControlSchedule& s) {
    json arr = json::array();
    for (const auto& st : s.stages()) {
        json j = {{"duration", st.duration},
                  {"omega_R", profile_json(st.omega_R)},
                  {"omega_L", profile_json(st.omega_L)},
                  {"flag", st.flag == StageFlag::Fast ? "fast" : "adiabatic"}};
        if (!st.label.empty()) j["label"] = st.label;
        arr.push_back(std::move(j));
    }
    return arr;
}

ControlSchedule schedule_from_json(const json& j) {
    const json& arr = j.is_object() && j.contains("stages") ? j.at("stages") : j;
    if (!arr.is_array()) throw ValidationError("schedule", "must be a list of stages");
    std::vector<Stage> stages;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const auto& e = arr[i];
        const std::string where = "schedule[" + std::to_string(i) + "]";
        if (!e.is_object()) throw ValidationError(where, "must be an object");
        Stage st;
        if (!e.contains("duration") || !e.at("duration").is_number())
            throw ValidationError(where + ".duration", "missing number");
        st.duration = e.at("duration").get<double>();
        if (!e.contains("omega_R") || !e.contains("omega_L"))
            throw ValidationError(where, "needs omega_R and omega_L profiles");
        st.omega_R = profile_from(e.at("omega_R"), where + ".omega_R");
        st.omega_L = profile_from(e.at("omega_L"), where + ".omega_L");
        const std::string flag = e.value("flag", std::string("adiabatic"));
        if (flag == "fast") st.flag = StageFlag::Fast;
        else if (flag == "adiabatic") st.flag = StageFlag::Adiabatic;
        else throw ValidationError(where + ".flag", "expected 'adiabatic' or 'fast'");
        st.label = e.value("label", std::string());
        stages.push_back(std::move(st));
    }
    return ControlSchedule(std::move(stages));
}

ControlSchedule make_protocol_schedule(const ProtocolScenario& s) {
    const double r2 = std::numbers::sqrt2;
    const double stat0 = s.omega0 / r2;
    const double stat1 = s.omega_hold / r2;
    std::vector<Stage> st;
    st.push_back({s.load_time, Profile::constant(s.omega0), Profile::constant(0.0), StageFlag::Adiabatic, "load"});
    st.push_back({s.ramp_time, Profile::smoothstep(s.omega0, stat0), Profile::smoothstep(0.0, stat0),
                  StageFlag::Adiabatic, "stop"});
    st.push_back({s.ramp_time, Profile::smoothstep(stat0, stat1), Profile::smoothstep(stat0, stat1),
                  StageFlag::Adiabatic, "interact"});
    st.push_back({s.hold_time, Profile::constant(stat1), Profile::constant(stat1), StageFlag::Adiabatic, "hold"});
    st.push_back({s.retrieval_time, Profile::smoothstep(stat1, s.omega0), Profile::smoothstep(stat1, 0.0),
                  s.fast_retrieval ? StageFlag::Fast : StageFlag::Adiabatic, "retrieve"});
    return ControlSchedule(std::move(st));
}

}  // namespace plab
