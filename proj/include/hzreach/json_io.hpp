#ifndef HZREACH_JSON_IO_HPP_
#define HZREACH_JSON_IO_HPP_

#include "hzreach/hybzono.hpp"
#include "hzreach/network.hpp"
#include "hzreach/scaled.hpp"
#include "hzreach/train.hpp"

#include <json.hpp>

#include <string>

namespace hz
{

using Json = nlohmann::json;

// Matrices as row-major nested arrays; any empty block serializes as [].
Json matrix_to_json(const Matrix& M);
Json vector_to_json(const Vector& v);
Matrix matrix_from_json(const Json& j);
Vector vector_from_json(const Json& j);

Json set_to_json(const HybridZonotope& P);
HybridZonotope set_from_json(const Json& j);

Json scaled_set_to_json(const ScaledHybridZonotope& S);
ScaledHybridZonotope scaled_set_from_json(const Json& j);

Json network_to_json(const ReluNetwork& net);
ReluNetwork network_from_json(const Json& j);

Json report_to_json(const TrainReport& r);
/// Deterministic trajectory view: one row per iteration (iter, loss, rtilde)
/// with verification rows interleaved; wall-clock timings live only in the
/// JSON report.
std::string report_to_csv(const TrainReport& r);

std::string format_double(double v);

Json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const Json& j);
void save_text_file(const std::string& path, const std::string& text);

} // namespace hz

#endif
