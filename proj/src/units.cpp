#include "uavisac/units.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <stdexcept>

namespace uavisac::units {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

namespace {

struct UnitDef {
  Dimension dim;
  double factor;   // multiplicative, ignored for db/dbm
  bool is_db;
  bool is_dbm;
};

const std::map<std::string, UnitDef>& unit_table() {
  static const std::map<std::string, UnitDef> table = {
      {"m", {Dimension::length, 1.0, false, false}},
      {"km", {Dimension::length, 1e3, false, false}},
      {"mm", {Dimension::length, 1e-3, false, false}},
      {"cm", {Dimension::length, 1e-2, false, false}},
      {"s", {Dimension::time, 1.0, false, false}},
      {"ms", {Dimension::time, 1e-3, false, false}},
      {"min", {Dimension::time, 60.0, false, false}},
      {"Hz", {Dimension::frequency, 1.0, false, false}},
      {"kHz", {Dimension::frequency, 1e3, false, false}},
      {"MHz", {Dimension::frequency, 1e6, false, false}},
      {"GHz", {Dimension::frequency, 1e9, false, false}},
      {"W", {Dimension::power, 1.0, false, false}},
      {"mW", {Dimension::power, 1e-3, false, false}},
      {"dBm", {Dimension::power, 0.0, false, true}},
      {"dB", {Dimension::ratio, 0.0, true, false}},
      {"m/s", {Dimension::speed, 1.0, false, false}},
      {"km/s", {Dimension::speed, 1e3, false, false}},
      {"km/h", {Dimension::speed, 1.0 / 3.6, false, false}},
      {"m^2", {Dimension::area, 1.0, false, false}},
      {"m2", {Dimension::area, 1.0, false, false}},
  };
  return table;
}

} // namespace

double parse_quantity(const std::string& text, Dimension dim) {
  const char* s = text.c_str();
  char* end = nullptr;
  double value = std::strtod(s, &end);
  if (end == s) throw std::invalid_argument("not a number: '" + text + "'");
  std::string unit(end);
  size_t b = unit.find_first_not_of(" \t");
  if (b == std::string::npos) {
    // bare number: already in canonical units (or linear ratio)
    return value;
  }
  size_t e = unit.find_last_not_of(" \t");
  unit = unit.substr(b, e - b + 1);

  auto it = unit_table().find(unit);
  if (it == unit_table().end())
    throw std::invalid_argument("unknown unit '" + unit + "' in '" + text + "'");
  const UnitDef& def = it->second;
  if (def.is_db) {
    if (dim != Dimension::ratio)
      throw std::invalid_argument("dB value '" + text + "' not allowed here");
    return db_to_linear(value);
  }
  if (def.is_dbm) {
    if (dim != Dimension::power)
      throw std::invalid_argument("dBm value '" + text + "' not allowed here");
    return dbm_to_watts(value);
  }
  if (def.dim != dim)
    throw std::invalid_argument("unit '" + unit + "' has wrong dimension in '" + text + "'");
  return value * def.factor;
}

} // namespace uavisac::units
