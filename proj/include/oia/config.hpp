#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oia/dqn.hpp"
#include "oia/env.hpp"

namespace oia {

enum class Scheme { kWithCache, kNoCache, kMyopicStatic };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

/// Everything an experiment needs: scenario, training knobs, seed, output
/// location, scheme selection and the sweep grid. Field defaults follow the
/// reference operating point (L=5, H=10, p_stay=0.489, p_hit=0.5, discount
/// 0.5, sync period 4, replay 100k), with the alignment solver capped at
/// 200 iterations / 1e-6 during training for speed.
struct ExperimentConfig {
    EnvConfig env;
    DqnHyperparams dqn;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    Scheme scheme = Scheme::kWithCache;
    std::vector<double> sweep_p_stay = {0.3, 0.489, 0.7, 0.9, 1.0};
    int replicas = 3;

    void validate() const;
};

ExperimentConfig default_config();

/// Line-oriented `key = value` text. Blank lines and lines starting with
/// '#' are skipped; unknown keys and unparsable values raise diagnostics
/// carrying source name and line number. Missing keys keep the defaults.
ExperimentConfig parse_config(const std::string& text, const std::string& source_name);
ExperimentConfig load_config(const std::string& path);

/// Every key in a fixed order with full-precision values; parse_config of
/// the result reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace oia
