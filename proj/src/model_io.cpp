#include "lumen/model_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace lumen {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ParseError(path + ": " + what);
}

double require_number(const json& doc, const std::string& path, const std::string& key) {
    if (!doc.contains(key)) fail(path + "." + key, "missing");
    if (!doc[key].is_number()) fail(path + "." + key, "must be a number");
    return doc[key].get<double>();
}

int require_int(const json& doc, const std::string& path, const std::string& key) {
    if (!doc.contains(key)) fail(path + "." + key, "missing");
    if (!doc[key].is_number_integer()) fail(path + "." + key, "must be an integer");
    return doc[key].get<int>();
}

// full-precision, locale-independent float formatting for the CSV writers
std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_config_line(std::ostream& os, const json& config) {
    if (!config.is_null() && !config.empty()) os << "# config: " << config.dump() << "\n";
}

} // namespace

ModelSpec model_from_json(const json& doc) {
    if (!doc.is_object()) fail("model", "document must be an object");
    ModelSpec spec;
    spec.mu0 = require_number(doc, "model", "mu0");
    if (!doc.contains("channels") || !doc["channels"].is_array())
        fail("model.channels", "missing or not an array");
    for (std::size_t i = 0; i < doc["channels"].size(); ++i) {
        const json& c = doc["channels"][i];
        const std::string path = "model.channels[" + std::to_string(i) + "]";
        if (!c.is_object()) fail(path, "must be an object");
        Channel channel;
        channel.triplet.k = require_int(c, path, "k");
        channel.triplet.r = require_int(c, path, "r");
        channel.triplet.s = require_int(c, path, "s");
        channel.mu = require_number(c, path, "mu");
        spec.channels.push_back(channel);
    }
    if (doc.contains("propensity_mode")) {
        if (!doc["propensity_mode"].is_string()) fail("model.propensity_mode", "must be a string");
        spec.propensity_mode = propensity_mode_from_string(doc["propensity_mode"].get<std::string>());
    }
    validate_model(spec);
    return spec;
}

ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return model_from_json(doc);
}

json model_to_json(const ModelSpec& spec) {
    json channels = json::array();
    for (const auto& [t, mu] : spec.channels)
        channels.push_back({{"k", t.k}, {"r", t.r}, {"s", t.s}, {"mu", mu}});
    return json{{"mu0", spec.mu0},
                {"channels", channels},
                {"propensity_mode", to_string(spec.propensity_mode)}};
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const json& config) {
    write_config_line(os, config);
    const std::size_t d = traj.initial.y.size();
    os << "time,channel,m";
    for (std::size_t i = 1; i <= d; ++i) os << ",y_" << i;
    os << "\n";
    auto row = [&](double time, int channel, const MicroState& s) {
        os << fmt(time) << "," << channel << "," << s.m;
        for (long long yi : s.y) os << "," << yi;
        os << "\n";
    };
    row(0.0, -1, traj.initial);
    for (const auto& e : traj.events) row(e.time, e.channel, e.state);
}

void write_position_csv(std::ostream& os, const PositionPath& path, const json& config) {
    write_config_line(os, config);
    const std::size_t d = path.x.empty() ? 0 : path.x.front().size();
    os << "t,x0";
    for (std::size_t i = 1; i <= d; ++i) os << ",x_" << i;
    os << "\n";
    for (std::size_t j = 0; j < path.size(); ++j) {
        os << fmt(path.times[j]) << "," << fmt(path.x0[j]);
        for (double xi : path.x[j]) os << "," << fmt(xi);
        os << "\n";
    }
}

void write_phase_csv(std::ostream& os, const PhaseTrajectory& traj, const json& config) {
    write_config_line(os, config);
    const std::size_t d = traj.points.empty() ? 0 : traj.points.front().x.size();
    os << "t,x0";
    for (std::size_t i = 1; i <= d; ++i) os << ",x_" << i;
    os << ",sigma";
    for (std::size_t i = 1; i <= d; ++i) os << ",kappa_" << i;
    os << ",H\n";
    for (std::size_t j = 0; j < traj.size(); ++j) {
        const PhasePoint& p = traj.points[j];
        os << fmt(traj.times[j]) << "," << fmt(p.x0);
        for (double xi : p.x) os << "," << fmt(xi);
        os << "," << fmt(p.sigma);
        for (double ki : p.kappa) os << "," << fmt(ki);
        os << "," << fmt(traj.hamiltonian_values[j]) << "\n";
    }
}

} // namespace lumen
