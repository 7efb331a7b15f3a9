#include "partopt/cli.hpp"

#include "partopt/capacity.hpp"
#include "partopt/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>

namespace partopt::cli {

namespace {

using nlohmann::json;

template <class T>
T get_as(const json& v, const std::string& key) {
    try {
        return v.get<T>();
    } catch (const json::exception&) {
        throw ValidationError("config key '" + key + "' has the wrong type");
    }
}

// Integers must be given as JSON integers, not 2.5 or "3".
template <class T>
T get_int(const json& v, const std::string& key) {
    if (!v.is_number_integer()) throw ValidationError("config key '" + key + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
        if (v.get<std::int64_t>() < 0) throw ValidationError("config key '" + key + "' must be non-negative");
        return static_cast<T>(v.get<std::int64_t>());
    } else {
        return static_cast<T>(v.get<std::int64_t>());
    }
}

double get_real(const json& v, const std::string& key) {
    if (!v.is_number()) throw ValidationError("config key '" + key + "' must be a number");
    return v.get<double>();
}

} // namespace

void RunConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ValidationError("epsilon must be positive");
    if (!std::isfinite(h)) throw ValidationError("h must be finite");
    if (niter < 1) throw ValidationError("niter must be at least 1");
    if (nmod < 1) throw ValidationError("nmod must be at least 1");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ValidationError("alpha must be positive");
    if (n < 0) throw ValidationError("n must be non-negative");
    if (restarts < 1) throw ValidationError("restarts must be at least 1");
    if (modes < 0) throw ValidationError("modes must be non-negative");
    if (reinit_every < 0) throw ValidationError("reinit_every must be non-negative");
    if (max_iter < 1) throw ValidationError("max_iter must be at least 1");
    if (!std::isfinite(tol_g)) throw ValidationError("tol_g must be finite");
    if (!(c > 0.0 && c < 1.0)) throw ValidationError("c must lie in (0,1)");
    if (!std::isfinite(perturb)) throw ValidationError("perturb must be finite");
    if (!(t_step > 0.0) || !(t_min < t_max) || !std::isfinite(t_min) || !std::isfinite(t_max))
        throw ValidationError("perimtrack needs t_min < t_max and t_step > 0");
    if (!fractions.empty()) {
        double s = 0.0;
        for (double f : fractions) {
            if (!(f > 0.0 && f < 1.0) && !(fractions.size() == 1 && f == 1.0))
                throw ValidationError("fractions must lie in (0,1)");
            s += f;
        }
        if (std::abs(s - 1.0) > 1e-9) throw ValidationError("fractions must sum to 1");
        if (n > 0 && static_cast<std::size_t>(n) != fractions.size())
            throw ValidationError("n does not match the number of fractions");
    }
    if (polygon != "square" && polygon != "disk" && polygon.rfind("csv:", 0) != 0)
        throw ValidationError("polygon must be square, disk or csv:PATH");
    if (polygon.rfind("csv:", 0) == 0 && polygon.size() == 4) throw ValidationError("csv polygon needs a path");
    parse_capacity_mode(mode);
    if (out.empty()) throw ValidationError("output directory must not be empty");
}

std::vector<double> RunConfig::resolved_fractions() const {
    if (!fractions.empty()) return fractions;
    if (n >= 1) return std::vector<double>(static_cast<std::size_t>(n), 1.0 / n);
    return {};
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw ValidationError("config file must hold a JSON object");

    RunConfig& c = base;
    for (const auto& [key, v] : j.items()) {
        if (key == "out") c.out = get_as<std::string>(v, key);
        else if (key == "seed") c.seed = get_int<std::uint64_t>(v, key);
        else if (key == "epsilon") c.epsilon = get_real(v, key);
        else if (key == "h") c.h = get_real(v, key);
        else if (key == "niter") c.niter = get_int<int>(v, key);
        else if (key == "alpha") c.alpha = get_real(v, key);
        else if (key == "nmod") c.nmod = get_int<int>(v, key);
        else if (key == "n") c.n = get_int<int>(v, key);
        else if (key == "fractions") {
            if (!v.is_array()) throw ValidationError("config key 'fractions' must be an array");
            c.fractions.clear();
            for (const auto& f : v) c.fractions.push_back(get_real(f, key));
        }
        else if (key == "c") c.c = get_real(v, key);
        else if (key == "polygon") c.polygon = get_as<std::string>(v, key);
        else if (key == "restarts") c.restarts = get_int<int>(v, key);
        else if (key == "allow_partial") c.allow_partial = get_as<bool>(v, key);
        else if (key == "equal") c.equal = get_as<bool>(v, key);
        else if (key == "mode") c.mode = get_as<std::string>(v, key);
        else if (key == "modes") c.modes = get_int<int>(v, key);
        else if (key == "reinit_every") c.reinit_every = get_int<int>(v, key);
        else if (key == "shape") c.shape = get_as<std::string>(v, key);
        else if (key == "perturb") c.perturb = get_real(v, key);
        else if (key == "t_min") c.t_min = get_real(v, key);
        else if (key == "t_max") c.t_max = get_real(v, key);
        else if (key == "t_step") c.t_step = get_real(v, key);
        else if (key == "max_iter") c.max_iter = get_int<int>(v, key);
        else if (key == "tol_g") c.tol_g = get_real(v, key);
        else if (key == "multiplier_term") c.multiplier_term = get_as<bool>(v, key);
        else if (key == "svg") c.svg = get_as<bool>(v, key);
        else if (key == "quiet") c.quiet = get_as<bool>(v, key);
        else throw ValidationError("unknown config key '" + key + "'");
    }
    return c;
}

} // namespace partopt::cli
