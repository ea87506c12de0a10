#pragma once

#include <string>

#include "arrowid/types.hpp"

namespace arrowid {

/// Reads a dataset CSV with header `t,force_N,disp_m`. Lines starting with
/// '#' and blank lines are skipped. Timestamps must be uniform to a relative
/// 1e-6; violations raise parse_error carrying the offending line number.
Dataset load_dataset(const std::string& path);

/// Writes the header and one row per sample, t = n * dt, with values printed
/// exactly (shortest round-trip decimal form).
void write_dataset(const std::string& path, const Dataset& data);

/// Command-voltage record with header `t,command_V`; same conventions as the
/// dataset format.
TimeSeries load_command(const std::string& path);
void write_command(const std::string& path, const TimeSeries& command);

}  // namespace arrowid
