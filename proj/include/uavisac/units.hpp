#pragma once

#include <string>

namespace uavisac::units {

// Quantity families a config value may belong to. Each family defines the
// canonical internal unit (meters, seconds, Hz, Watts, linear power ratio).
enum class Dimension { length, time, frequency, power, speed, area, ratio, plain };

// Parses "0.2 MHz", "-110 dB", "1.7 km", "40" (already canonical), ...
// Returns the value in canonical units. Throws std::invalid_argument with a
// descriptive message on unknown units or malformed numbers.
double parse_quantity(const std::string& text, Dimension dim);

// dB -> linear power ratio, dBm -> Watts.
double db_to_linear(double db);
double dbm_to_watts(double dbm);

} // namespace uavisac::units
