#include "oia/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

#include "oia/text.hpp"

namespace oia {
namespace {

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> parts;
    while (true) {
        const std::size_t comma = value.find(',');
        if (comma == std::string_view::npos) {
            parts.push_back(trim(value));
            break;
        }
        parts.push_back(trim(value.substr(0, comma)));
        value.remove_prefix(comma + 1);
    }
    return parts;
}

template <typename T>
std::vector<T> parse_number_list(std::string_view value) {
    std::vector<T> out;
    for (const std::string_view part : split_list(value)) out.push_back(parse_number<T>(part));
    return out;
}

template <typename T>
std::string join_numbers(const std::vector<T>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        if constexpr (std::is_floating_point_v<T>)
            out += format_double(values[i]);
        else
            out += std::to_string(values[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
    static const std::map<std::string, Setter, std::less<>> table = {
        {"users", [](ExperimentConfig& c, std::string_view v) { c.env.users = parse_number<int>(v); }},
        {"snr_levels", [](ExperimentConfig& c, std::string_view v) { c.env.snr_levels = parse_number<int>(v); }},
        {"p_stay", [](ExperimentConfig& c, std::string_view v) { c.env.p_stay = parse_number<double>(v); }},
        {"p_hit", [](ExperimentConfig& c, std::string_view v) { c.env.p_hit = parse_number<double>(v); }},
        {"c_total", [](ExperimentConfig& c, std::string_view v) { c.env.c_total = parse_number<double>(v); }},
        {"c_csi", [](ExperimentConfig& c, std::string_view v) { c.env.c_csi = parse_number<double>(v); }},
        {"n_t", [](ExperimentConfig& c, std::string_view v) { c.env.n_t = parse_number<int>(v); }},
        {"n_r", [](ExperimentConfig& c, std::string_view v) { c.env.n_r = parse_number<int>(v); }},
        {"d",
         [](ExperimentConfig& c, std::string_view v) {
             c.env.d = parse_number<int>(v);
             c.env.ia.d = c.env.d;
         }},
        {"noise_var", [](ExperimentConfig& c, std::string_view v) { c.env.noise_var = parse_number<double>(v); }},
        {"slots_per_episode",
         [](ExperimentConfig& c, std::string_view v) { c.env.slots_per_episode = parse_number<int>(v); }},
        {"ia_max_iter", [](ExperimentConfig& c, std::string_view v) { c.env.ia.max_iter = parse_number<int>(v); }},
        {"ia_tol", [](ExperimentConfig& c, std::string_view v) { c.env.ia.tol = parse_number<double>(v); }},
        {"discount", [](ExperimentConfig& c, std::string_view v) { c.dqn.discount = parse_number<double>(v); }},
        {"greedy_start", [](ExperimentConfig& c, std::string_view v) { c.dqn.greedy_start = parse_number<double>(v); }},
        {"greedy_end", [](ExperimentConfig& c, std::string_view v) { c.dqn.greedy_end = parse_number<double>(v); }},
        {"anneal_steps", [](ExperimentConfig& c, std::string_view v) { c.dqn.anneal_steps = parse_number<long>(v); }},
        {"batch_size", [](ExperimentConfig& c, std::string_view v) { c.dqn.batch_size = parse_number<int>(v); }},
        {"target_sync_period",
         [](ExperimentConfig& c, std::string_view v) { c.dqn.target_sync_period = parse_number<int>(v); }},
        {"learning_rate",
         [](ExperimentConfig& c, std::string_view v) { c.dqn.learning_rate = parse_number<double>(v); }},
        {"replay_capacity",
         [](ExperimentConfig& c, std::string_view v) {
             c.dqn.replay_capacity = parse_number<unsigned long long>(v);
         }},
        {"warmup_min", [](ExperimentConfig& c, std::string_view v) { c.dqn.warmup_min = parse_number<int>(v); }},
        {"episodes", [](ExperimentConfig& c, std::string_view v) { c.dqn.episodes = parse_number<int>(v); }},
        {"hidden_widths",
         [](ExperimentConfig& c, std::string_view v) { c.dqn.hidden_widths = parse_number_list<int>(v); }},
        {"seed",
         [](ExperimentConfig& c, std::string_view v) { c.seed = parse_number<unsigned long long>(v); }},
        {"out_dir",
         [](ExperimentConfig& c, std::string_view v) {
             if (v.empty()) throw std::invalid_argument("out_dir must not be empty");
             c.out_dir = std::string(v);
         }},
        {"scheme",
         [](ExperimentConfig& c, std::string_view v) { c.scheme = scheme_from_string(std::string(v)); }},
        {"sweep_p_stay",
         [](ExperimentConfig& c, std::string_view v) { c.sweep_p_stay = parse_number_list<double>(v); }},
        {"replicas", [](ExperimentConfig& c, std::string_view v) { c.replicas = parse_number<int>(v); }},
    };
    return table;
}

}  // namespace

std::string to_string(Scheme scheme) {
    switch (scheme) {
        case Scheme::kWithCache: return "with-cache";
        case Scheme::kNoCache: return "no-cache";
        case Scheme::kMyopicStatic: return "myopic-static";
    }
    throw std::invalid_argument("to_string: bad scheme value");
}

Scheme scheme_from_string(const std::string& name) {
    if (name == "with-cache") return Scheme::kWithCache;
    if (name == "no-cache") return Scheme::kNoCache;
    if (name == "myopic-static") return Scheme::kMyopicStatic;
    throw std::invalid_argument("unknown scheme '" + name +
                                "' (expected with-cache, no-cache or myopic-static)");
}

void ExperimentConfig::validate() const {
    env.validate();
    dqn.validate();
    if (sweep_p_stay.empty())
        throw std::invalid_argument("ExperimentConfig: sweep_p_stay must not be empty");
    for (const double p : sweep_p_stay)
        if (!(p > 0.0) || p > 1.0)
            throw std::invalid_argument("ExperimentConfig: sweep values must be in (0, 1]");
    if (replicas < 1) throw std::invalid_argument("ExperimentConfig: replicas must be >= 1");
    if (out_dir.empty()) throw std::invalid_argument("ExperimentConfig: out_dir must not be empty");
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    // Training-loop solver budget; the solver's own defaults stay tighter
    // for standalone alignment studies.
    cfg.env.ia.max_iter = 200;
    cfg.env.ia.tol = 1e-6;
    return cfg;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source_name) {
    ExperimentConfig cfg = default_config();
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const std::size_t eq = stripped.find('=');
        const std::string where = source_name + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string_view::npos)
            throw std::runtime_error(where + "expected 'key = value'");
        const std::string key(trim(stripped.substr(0, eq)));
        const std::string_view value = trim(stripped.substr(eq + 1));
        if (key.empty()) throw std::runtime_error(where + "missing key before '='");
        const auto it = setters().find(key);
        if (it == setters().end())
            throw std::runtime_error(where + "unknown key '" + key + "'");
        try {
            it->second(cfg, value);
        } catch (const std::exception& e) {
            throw std::runtime_error(where + "key '" + key + "': " + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw std::runtime_error(source_name + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read config file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::string out;
    const auto line = [&out](const std::string& key, const std::string& value) {
        out += key;
        out += " = ";
        out += value;
        out += '\n';
    };
    line("users", std::to_string(cfg.env.users));
    line("snr_levels", std::to_string(cfg.env.snr_levels));
    line("p_stay", format_double(cfg.env.p_stay));
    line("p_hit", format_double(cfg.env.p_hit));
    line("c_total", format_double(cfg.env.c_total));
    line("c_csi", format_double(cfg.env.c_csi));
    line("n_t", std::to_string(cfg.env.n_t));
    line("n_r", std::to_string(cfg.env.n_r));
    line("d", std::to_string(cfg.env.d));
    line("noise_var", format_double(cfg.env.noise_var));
    line("slots_per_episode", std::to_string(cfg.env.slots_per_episode));
    line("ia_max_iter", std::to_string(cfg.env.ia.max_iter));
    line("ia_tol", format_double(cfg.env.ia.tol));
    line("discount", format_double(cfg.dqn.discount));
    line("greedy_start", format_double(cfg.dqn.greedy_start));
    line("greedy_end", format_double(cfg.dqn.greedy_end));
    line("anneal_steps", std::to_string(cfg.dqn.anneal_steps));
    line("batch_size", std::to_string(cfg.dqn.batch_size));
    line("target_sync_period", std::to_string(cfg.dqn.target_sync_period));
    line("learning_rate", format_double(cfg.dqn.learning_rate));
    line("replay_capacity", std::to_string(cfg.dqn.replay_capacity));
    line("warmup_min", std::to_string(cfg.dqn.warmup_min));
    line("episodes", std::to_string(cfg.dqn.episodes));
    line("hidden_widths", join_numbers(cfg.dqn.hidden_widths));
    line("seed", std::to_string(cfg.seed));
    line("out_dir", cfg.out_dir);
    line("scheme", to_string(cfg.scheme));
    line("sweep_p_stay", join_numbers(cfg.sweep_p_stay));
    line("replicas", std::to_string(cfg.replicas));
    return out;
}

}  // namespace oia
