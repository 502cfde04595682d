#pragma once

#include <string>

#include "mixcde/kernel.hpp"
#include "mixcde/mixture.hpp"

namespace mixcde {

// JSON object with keys: m, weights, components (array of objects with keys
// beta, mu_x, s_y, s_x), sigma_y, sigma_x. Numbers round-trip exactly.
std::string to_json_string(const MixtureTheta& theta);
MixtureTheta theta_from_json_string(const std::string& text);

// JSON object with keys h_y, h_x.
std::string to_json_string(const Bandwidths& bw);
Bandwidths bandwidths_from_json_string(const std::string& text);

// CSV with header y,x1..xd and one row per observation, written with
// round-trip precision; companion reader.
void save_dataset_csv(const Dataset& data, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

}  // namespace mixcde
