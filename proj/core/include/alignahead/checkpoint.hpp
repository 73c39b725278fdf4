#pragma once

#include <filesystem>

#include "alignahead/student.hpp"

ALIGNAHEAD_NAMESPACE_BEGIN

/// Binary container: 8-byte magic "ALNHCKP1", little-endian uint64 header
/// length, a JSON header (precision, layer and aux specs, tensor table), then
/// the raw parameter values in the header's order.
void save_checkpoint(const StudentModel& model, const std::filesystem::path& path);

/// Throws DatasetError on a malformed file or a precision mismatch.
StudentModel load_checkpoint(const std::filesystem::path& path);

ALIGNAHEAD_NAMESPACE_END
