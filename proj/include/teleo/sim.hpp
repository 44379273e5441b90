#pragma once
// Headless discrete-time worlds: a thermostat room and a small asteroids
// game. Both sense to percept terms and accept `controls([...])` messages.

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "teleo/term.hpp"

namespace teleo::sim {

struct Vec2 {
    double x = 0;
    double y = 0;
};

/// Common interface for the lock-step harness and the live runner.
class World {
public:
    virtual ~World() = default;
    virtual std::vector<Term> sense() const = 0;
    /// Replaces the active action set. Returns action names the world does
    /// not know; they are ignored.
    virtual std::vector<std::string> apply_controls(const Term& controls) = 0;
    virtual void step() = 0;
    virtual std::uint64_t tick() const = 0;
    /// True when the world's goal is reached (no asteroids left).
    virtual bool done() const { return false; }
};

// ---------------------------------------------------------------------------
// Thermostat

struct ThermostatConfig {
    double initial_temperature = 15;
    double heat_rate = 0.125;   // degrees per tick while heating
    double cool_rate = 0.0625;  // degrees per tick otherwise
};

struct ThermostatState {
    double temperature = 15;
    bool heating = false;
    std::uint64_t tick = 0;
};

/// `[temperature(T)]`
std::vector<Term> sense(const ThermostatState& s);
/// turn_on_heating / turn_off_heating latch the heater.
std::vector<std::string> apply_controls(ThermostatState& s, const Term& controls);
void step(ThermostatState& s, const ThermostatConfig& cfg);

/// Band the closed loop stays in once it has reached the target, allowing
/// the agent one tick of reaction lag: 2 * max(heat_rate, cool_rate).
double thermostat_band(const ThermostatConfig& cfg);

class ThermostatWorld : public World {
public:
    explicit ThermostatWorld(ThermostatConfig cfg = {});
    std::vector<Term> sense() const override;
    std::vector<std::string> apply_controls(const Term& controls) override;
    void step() override;
    std::uint64_t tick() const override { return state_.tick; }
    const ThermostatState& state() const noexcept { return state_; }

private:
    ThermostatConfig cfg_;
    ThermostatState state_;
};

// ---------------------------------------------------------------------------
// Asteroids

struct AsteroidsConfig {
    double width = 800;
    double height = 600;
    double vision_range = 300;
    // Bearing cutoffs (radians, absolute value): [0, dead_centre) is
    // dead_centre, [dead_centre, centre) is centre, [centre, side) is
    // left/right, anything wider is out of view.
    double dead_centre = 0.05;
    double centre = 0.3;
    double side = std::numbers::pi / 2;
    double thrust = 0.3;       // speed added per tick by move_forward
    double turn_rate = 0.06;   // radians per tick
    double friction = 0.98;    // speed multiplier per tick
    double max_speed = 6;
    double bullet_speed = 10;
    std::uint32_t bullet_life = 35;  // ticks
    std::uint32_t asteroids = 3;
    double min_radius = 22;
    double max_radius = 34;
    double max_drift = 0.4;  // asteroid speed bound, px/tick
    double clear_zone = 120;  // no asteroid starts closer than this to the ship
    std::uint64_t seed = 1;
};

struct Ship {
    Vec2 pos;
    double heading = 0;  // radians in [0, 2pi), 0 is east, counter-clockwise
    double speed = 0;    // px per tick, >= 0
    std::set<std::string> active;
};

struct Asteroid {
    Vec2 pos;
    Vec2 vel;
    double radius = 1;
};

struct Bullet {
    Vec2 pos;
    Vec2 vel;
    std::uint32_t age = 0;
};

struct AsteroidsState {
    Ship ship;
    std::vector<Asteroid> asteroids;
    std::vector<Bullet> bullets;
    std::uint64_t tick = 0;
};

/// Ship in the middle facing east; asteroids placed from `cfg.seed`.
AsteroidsState make_asteroids(const AsteroidsConfig& cfg);

/// Signed angle of `target` seen from the ship, in (-pi, pi]; positive is
/// to the left of the heading.
double bearing(const Ship& ship, Vec2 target, const AsteroidsConfig& cfg);
/// Shortest displacement from `a` to `b` on the wrapping world.
Vec2 displacement(Vec2 a, Vec2 b, const AsteroidsConfig& cfg);
/// dead_centre, centre, left or right; nullopt behind the side cutoff.
std::optional<std::string> direction_bucket(double bearing, const AsteroidsConfig& cfg);

/// One `see(asteroid, Dir, Dist)` per visible asteroid (distance rounded to
/// an integer), then `facing_direction(H)` and `speed(S)` rounded to 1e-3.
std::vector<Term> sense(const AsteroidsState& s, const AsteroidsConfig& cfg);
std::vector<std::string> apply_controls(AsteroidsState& s, const Term& controls);
/// turn, thrust, friction, move, shoot, collide.
void step(AsteroidsState& s, const AsteroidsConfig& cfg);

class AsteroidsWorld : public World {
public:
    explicit AsteroidsWorld(AsteroidsConfig cfg = {});
    std::vector<Term> sense() const override;
    std::vector<std::string> apply_controls(const Term& controls) override;
    void step() override;
    std::uint64_t tick() const override { return state_.tick; }
    bool done() const override { return state_.asteroids.empty(); }
    const AsteroidsState& state() const noexcept { return state_; }
    AsteroidsState& state() noexcept { return state_; }

private:
    AsteroidsConfig cfg_;
    AsteroidsState state_;
};

// ---------------------------------------------------------------------------
// Traces

struct TraceLine {
    std::uint64_t tick = 0;
    std::vector<Term> percepts;
    Term controls = Term::atom("_");
};

/// `T=<tick> P=percepts([...]) C=controls([...])`
std::string format_trace_line(const TraceLine& line);
/// Throws SyntaxError on a malformed line.
TraceLine parse_trace_line(const std::string& text);
/// Every non-blank line of a trace file.
std::vector<TraceLine> read_trace(std::istream& in);

}  // namespace teleo::sim
