#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace plab {

enum class ProfileShape { Constant, Linear, Smoothstep };

/// Time profile of one control coupling within a stage, s in [0, 1].
struct Profile {
    ProfileShape shape = ProfileShape::Constant;
    double from = 0.0;
    double to = 0.0;  ///< ignored for Constant

    double at(double s) const noexcept;
    double start() const noexcept { return from; }
    double end() const noexcept { return shape == ProfileShape::Constant ? from : to; }

    static Profile constant(double v) { return {ProfileShape::Constant, v, v}; }
    static Profile linear(double a, double b) { return {ProfileShape::Linear, a, b}; }
    static Profile smoothstep(double a, double b) { return {ProfileShape::Smoothstep, a, b}; }

    bool operator==(const Profile&) const = default;
};

enum class StageFlag { Adiabatic, Fast };

struct Stage {
    double duration = 0.0;
    Profile omega_R;
    Profile omega_L;
    StageFlag flag = StageFlag::Adiabatic;
    std::string label;

    bool operator==(const Stage&) const = default;
};

struct ControlSample {
    double omega_R;
    double omega_L;
};

/// Piecewise control profiles. Adjacent stages must join continuously unless
/// the later stage is flagged Fast, which allows a jump at its start.
class ControlSchedule {
public:
    ControlSchedule() = default;
    explicit ControlSchedule(std::vector<Stage> stages);

    const std::vector<Stage>& stages() const noexcept { return stages_; }
    double total_duration() const noexcept;
    double stage_start(std::size_t i) const noexcept;

    /// Couplings at time t. Stage intervals are half-open [start, end); zero
    /// duration stages only contribute their end values. Beyond the end the
    /// last values persist.
    ControlSample sample(double t) const noexcept;
    /// Largest sqrt(omega_R^2 + omega_L^2) reached anywhere in the schedule.
    double max_omega_total() const noexcept;
    ControlSample initial() const noexcept;
    ControlSample final() const noexcept;

    /// Sets the duration of every adiabatic stage whose profiles vary.
    ControlSchedule with_ramp_time(double T) const;

    bool operator==(const ControlSchedule&) const = default;

private:
    std::vector<Stage> stages_;
};

nlohmann::json to_json(const ControlSchedule& s);
ControlSchedule schedule_from_json(const nlohmann::json& j);

/// Four-stage storage protocol: EIT loading at (omega0, 0), ramp to the
/// stationary point (omega0, omega0)/sqrt2, ramp the total coupling down to
/// omega_hold, hold, then retrieve back to (omega0, 0).
struct ProtocolScenario {
    double omega0 = 3.0;
    double omega_hold = 1.0;
    double load_time = 0.0;
    double ramp_time = 100.0;
    double hold_time = 100.0;
    double retrieval_time = 100.0;  ///< ramp duration of the retrieval stage
    bool fast_retrieval = false;    ///< flag the retrieval stage Fast
};

ControlSchedule make_protocol_schedule(const ProtocolScenario& s);

}  // namespace plab
