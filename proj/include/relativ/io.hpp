#pragma once

#include <cstdint>
#include <string>

#include "relativ/field.hpp"

namespace relativ {

/// Decimal text with 17 significant digits; doubles survive the round trip
/// bit-exactly.
std::string format_sig17(double x);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a half-written file.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

/// FNV-1a over the raw bytes.
std::uint64_t fnv1a64(const std::string& data);

/// "fnv1a64:<16 hex digits>" — the manifest's content-hash format.
std::string content_hash(const std::string& data);

/// RFC-4180 CSV (CRLF line ends) with columns coordinate,value.
std::string field_to_csv(const SampledField& field);

/// JSON sidecar carrying geometry, dimension and the extension rule.
std::string field_sidecar(const SampledField& field);

/// Inverse of field_to_csv + field_sidecar; numeric columns round-trip
/// bit-exactly.  Unknown sidecar keys are rejected.
SampledField field_from_csv(const std::string& csv, const std::string& sidecar);

void save_field(const std::string& csv_path, const std::string& sidecar_path,
                const SampledField& field);
SampledField load_field(const std::string& csv_path,
                        const std::string& sidecar_path);

}  // namespace relativ
