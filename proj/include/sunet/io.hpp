#pragma once

#include "sunet/forward_model.hpp"
#include "sunet/network.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace sunet {

using Json = nlohmann::ordered_json;

Json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const Json& j);

Json grid_function_to_json(const GridFunction<double>& f);
GridFunction<double> grid_function_from_json(const Json& j, const Grid& grid);

Json class_params_to_json(const NetClassParams& p);
NetClassParams class_params_from_json(const Json& j);

/// J, d, M, boundary, grid, every filter with its index bounds, thresholds,
/// psi and phi samples, and optionally the class constants. Doubles
/// round-trip exactly.
Json net_to_json(const SUNet& net, const std::optional<NetClassParams>& params = std::nullopt);
SUNet net_from_json(const Json& j, NetClassParams* params = nullptr);

Json training_set_to_json(const TrainingSet& ts);
TrainingSet training_set_from_json(const Json& j);

Json read_json(const std::string& path);
/// Writes with two-space indentation and a trailing newline.
void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

}  // namespace sunet
