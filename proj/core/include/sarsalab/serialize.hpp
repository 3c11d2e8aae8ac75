#pragma once

#include <string>

#include "sarsalab/features.hpp"
#include "sarsalab/format.hpp"
#include "sarsalab/mdp.hpp"
#include "sarsalab/oracle.hpp"

namespace sarsalab {

// Structured text formats. An .mdp file carries n_states, n_actions, gamma,
// r_max, the kernel rows P(.|x,a) in (x,a) row-major order, and the reward
// table; a .features file carries the dimensions and the row-major table.
void save_mdp(const FiniteMdp& mdp, const std::string& path);
FiniteMdp load_mdp(const std::string& path);
std::string mdp_to_string(const FiniteMdp& mdp);
FiniteMdp mdp_from_string(const std::string& text);

void save_features(const FeatureMap& fm, const std::string& path);
FeatureMap load_features(const std::string& path);
std::string features_to_string(const FeatureMap& fm);
FeatureMap features_from_string(const std::string& text);

/// Scalar report consumed by humans and diffed by the regression tests;
/// every scalar rendered at 17 significant digits.
std::string fixed_point_to_string(const FixedPointReport& report);
void save_fixed_point(const FixedPointReport& report, const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace sarsalab
