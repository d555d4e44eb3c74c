#pragma once

#include "kppfront/charspec.hpp"
#include "kppfront/domain.hpp"
#include "kppfront/frontsolver.hpp"
#include "kppfront/mapbounds.hpp"
#include "kppfront/pdesim.hpp"
#include "kppfront/shape.hpp"
#include "kppfront/sweep.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace kpp {

inline constexpr const char* kVersion = "1.0.0";

/// 17 significant digits; "inf" / "-inf" / "nan" for the non-finite values.
std::string format_number(double v);

/// Inverse of format_number; throws DomainError on malformed text.
double parse_number(const std::string& s);

/// JSON text in which every floating number carries 17 significant digits,
/// infinities become the string "inf" ("-inf") and NaN becomes null.
std::string dump_json(const nlohmann::json& j, int indent = 2);

/// Reads a number that may have been written as "inf" / "-inf".
double json_number(const nlohmann::json& j);

/// Writes to a temporary file in the same directory, then renames it over
/// the target. Throws std::runtime_error on I/O failure.
void write_atomic(const std::string& path, const std::string& content);

std::string profile_to_csv(const GridProfile& p);
/// Parses "t,phi" rows on a uniform grid; throws DomainError otherwise.
GridProfile profile_from_csv(const std::string& text);

nlohmann::json profile_to_json(const GridProfile& p);
GridProfile profile_from_json(const nlohmann::json& j);

/// 64-byte header {"KPPF", version, nx, nt, dx, dt_row, tau, x0, dt_step}
/// followed by nt * nx little-endian doubles, row-major (time, space).
std::string field_to_bin(const SimField& f);
SimField field_from_bin(const std::string& bytes);

nlohmann::json to_json(const CharRoot& r);
nlohmann::json to_json(const MapBounds& b);
nlohmann::json to_json(const TailReport& t);
nlohmann::json to_json(const FrontReport& r);
nlohmann::json to_json(const ClassificationReport& r);
nlohmann::json to_json(const SpeedEstimate& s);
nlohmann::json to_json(const AmplitudeRecord& a);
nlohmann::json to_json(const RegionCell& c);

std::string curves_to_csv(const std::vector<double>& taus);
std::string orbit_to_csv(const std::vector<double>& orbit);
std::string plane_to_csv(const std::vector<RegionCell>& cells);

}  // namespace kpp
