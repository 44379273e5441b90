#include "teleo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <random>

#include "teleo/errors.hpp"

namespace teleo::sim {

namespace {

constexpr double kTwoPi = 2 * std::numbers::pi;

double round3(double v) { return std::round(v * 1000) / 1000; }

double wrap(double v, double size) {
    v = std::fmod(v, size);
    return v < 0 ? v + size : v;
}

double normalize_heading(double h) {
    h = std::fmod(h, kTwoPi);
    if (h < 0) h += kTwoPi;
    return h >= kTwoPi ? 0 : h;
}

std::vector<std::string> action_names(const Term& controls) {
    if (!controls.is_compound() || controls.name() != "controls" || controls.arity() != 1 ||
        !controls.args()[0].is_list()) {
        throw InternalError("not a controls message: " + format_term(controls));
    }
    std::vector<std::string> out;
    for (const Term& a : controls.args()[0].args()) {
        out.push_back(a.is_predicate() ? a.name() : format_term(a));
    }
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Thermostat

std::vector<Term> sense(const ThermostatState& s) {
    return {Term::compound("temperature", {Term::decimal(s.temperature)})};
}

std::vector<std::string> apply_controls(ThermostatState& s, const Term& controls) {
    std::vector<std::string> unknown;
    for (const auto& name : action_names(controls)) {
        if (name == "turn_on_heating") {
            s.heating = true;
        } else if (name == "turn_off_heating") {
            s.heating = false;
        } else {
            unknown.push_back(name);
        }
    }
    return unknown;
}

void step(ThermostatState& s, const ThermostatConfig& cfg) {
    s.temperature += s.heating ? cfg.heat_rate : -cfg.cool_rate;
    ++s.tick;
}

double thermostat_band(const ThermostatConfig& cfg) {
    return 2 * std::max(cfg.heat_rate, cfg.cool_rate);
}

ThermostatWorld::ThermostatWorld(ThermostatConfig cfg) : cfg_(cfg) {
    state_.temperature = cfg.initial_temperature;
}

std::vector<Term> ThermostatWorld::sense() const { return sim::sense(state_); }

std::vector<std::string> ThermostatWorld::apply_controls(const Term& controls) {
    return sim::apply_controls(state_, controls);
}

void ThermostatWorld::step() { sim::step(state_, cfg_); }

// ---------------------------------------------------------------------------
// Asteroids

AsteroidsState make_asteroids(const AsteroidsConfig& cfg) {
    AsteroidsState s;
    s.ship.pos = {cfg.width / 2, cfg.height / 2};
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ux(0, cfg.width), uy(0, cfg.height);
    std::uniform_real_distribution<double> ur(cfg.min_radius, cfg.max_radius);
    std::uniform_real_distribution<double> uangle(0, kTwoPi), udrift(0, cfg.max_drift);
    while (s.asteroids.size() < cfg.asteroids) {
        Asteroid a;
        a.pos = {ux(rng), uy(rng)};
        a.radius = ur(rng);
        double angle = uangle(rng), v = udrift(rng);
        a.vel = {v * std::cos(angle), v * std::sin(angle)};
        Vec2 d = displacement(s.ship.pos, a.pos, cfg);
        if (std::hypot(d.x, d.y) < cfg.clear_zone + a.radius) continue;
        s.asteroids.push_back(a);
    }
    return s;
}

Vec2 displacement(Vec2 a, Vec2 b, const AsteroidsConfig& cfg) {
    double dx = b.x - a.x, dy = b.y - a.y;
    dx -= cfg.width * std::round(dx / cfg.width);
    dy -= cfg.height * std::round(dy / cfg.height);
    return {dx, dy};
}

double bearing(const Ship& ship, Vec2 target, const AsteroidsConfig& cfg) {
    Vec2 d = displacement(ship.pos, target, cfg);
    double b = std::atan2(d.y, d.x) - ship.heading;
    b = std::remainder(b, kTwoPi);  // [-pi, pi]
    return b == -std::numbers::pi ? std::numbers::pi : b;
}

std::optional<std::string> direction_bucket(double b, const AsteroidsConfig& cfg) {
    double a = std::abs(b);
    if (a < cfg.dead_centre) return "dead_centre";
    if (a < cfg.centre) return "centre";
    if (a < cfg.side) return b > 0 ? "left" : "right";
    return std::nullopt;
}

std::vector<Term> sense(const AsteroidsState& s, const AsteroidsConfig& cfg) {
    std::vector<Term> out;
    for (const Asteroid& a : s.asteroids) {
        Vec2 d = displacement(s.ship.pos, a.pos, cfg);
        double dist = std::hypot(d.x, d.y);
        if (dist > cfg.vision_range) continue;
        auto dir = direction_bucket(bearing(s.ship, a.pos, cfg), cfg);
        if (!dir) continue;
        out.push_back(Term::compound("see", {Term::atom("asteroid"), Term::atom(*dir),
                                             Term::integer(std::llround(dist))}));
    }
    out.push_back(Term::compound("facing_direction", {Term::decimal(round3(s.ship.heading))}));
    out.push_back(Term::compound("speed", {Term::decimal(round3(s.ship.speed))}));
    return out;
}

std::vector<std::string> apply_controls(AsteroidsState& s, const Term& controls) {
    static const std::set<std::string> known{"turn_left", "turn_right", "move_forward",
                                             "move_backward", "nothing", "shoot"};
    std::vector<std::string> unknown;
    s.ship.active.clear();
    for (const auto& name : action_names(controls)) {
        if (known.count(name)) {
            s.ship.active.insert(name);
        } else {
            unknown.push_back(name);
        }
    }
    return unknown;
}

void step(AsteroidsState& s, const AsteroidsConfig& cfg) {
    Ship& ship = s.ship;
    auto on = [&](const char* a) { return ship.active.count(a) > 0; };
    if (on("turn_left")) ship.heading += cfg.turn_rate;
    if (on("turn_right")) ship.heading -= cfg.turn_rate;
    ship.heading = normalize_heading(ship.heading);
    if (on("move_forward")) ship.speed += cfg.thrust;
    if (on("move_backward")) ship.speed -= cfg.thrust;
    ship.speed = std::clamp(ship.speed * cfg.friction, 0.0, cfg.max_speed);

    Vec2 dir{std::cos(ship.heading), std::sin(ship.heading)};
    ship.pos = {wrap(ship.pos.x + dir.x * ship.speed, cfg.width),
                wrap(ship.pos.y + dir.y * ship.speed, cfg.height)};
    for (Asteroid& a : s.asteroids) {
        a.pos = {wrap(a.pos.x + a.vel.x, cfg.width), wrap(a.pos.y + a.vel.y, cfg.height)};
    }
    for (Bullet& b : s.bullets) {
        b.pos = {wrap(b.pos.x + b.vel.x, cfg.width), wrap(b.pos.y + b.vel.y, cfg.height)};
        ++b.age;
    }
    std::erase_if(s.bullets, [&](const Bullet& b) { return b.age > cfg.bullet_life; });
    if (on("shoot")) {
        s.bullets.push_back({ship.pos, {dir.x * cfg.bullet_speed, dir.y * cfg.bullet_speed}, 0});
    }

    // A bullet removes the first asteroid it overlaps and is spent.
    std::vector<bool> hit(s.asteroids.size(), false);
    std::erase_if(s.bullets, [&](const Bullet& b) {
        for (std::size_t i = 0; i < s.asteroids.size(); ++i) {
            if (hit[i]) continue;
            Vec2 d = displacement(b.pos, s.asteroids[i].pos, cfg);
            if (std::hypot(d.x, d.y) <= s.asteroids[i].radius) {
                hit[i] = true;
                return true;
            }
        }
        return false;
    });
    std::size_t k = 0;
    std::erase_if(s.asteroids, [&](const Asteroid&) { return hit[k++]; });
    ++s.tick;
}

AsteroidsWorld::AsteroidsWorld(AsteroidsConfig cfg) : cfg_(cfg), state_(make_asteroids(cfg)) {}

std::vector<Term> AsteroidsWorld::sense() const { return sim::sense(state_, cfg_); }

std::vector<std::string> AsteroidsWorld::apply_controls(const Term& controls) {
    return sim::apply_controls(state_, controls);
}

void AsteroidsWorld::step() { sim::step(state_, cfg_); }

// ---------------------------------------------------------------------------
// Traces

std::string format_trace_line(const TraceLine& line) {
    return "T=" + std::to_string(line.tick) + " P=" +
           format_term(Term::compound("percepts", {Term::list(line.percepts)})) +
           " C=" + format_term(line.controls);
}

TraceLine parse_trace_line(const std::string& text) {
    if (text.rfind("T=", 0) != 0) throw SyntaxError("trace line must start with T=", 0);
    auto p = text.find(" P=");
    auto c = text.rfind(" C=");
    if (p == std::string::npos || c == std::string::npos || c < p) {
        throw SyntaxError("trace line needs P= and C= fields", 0);
    }
    TraceLine out;
    std::string tick = text.substr(2, p - 2);
    if (tick.empty() || !std::all_of(tick.begin(), tick.end(), ::isdigit)) {
        throw SyntaxError("bad tick '" + tick + "'", 2);
    }
    out.tick = std::stoull(tick);
    Term percepts = parse_term(text.substr(p + 3, c - p - 3));
    if (!percepts.is_compound() || percepts.name() != "percepts" || percepts.arity() != 1 ||
        !percepts.args()[0].is_list()) {
        throw SyntaxError("P= must hold percepts([...])", p + 3);
    }
    for (const Term& t : percepts.args()[0].args()) out.percepts.push_back(t);
    out.controls = parse_term(text.substr(c + 3));
    return out;
}

std::vector<TraceLine> read_trace(std::istream& in) {
    std::vector<TraceLine> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        out.push_back(parse_trace_line(line));
    }
    return out;
}

}  // namespace teleo::sim
