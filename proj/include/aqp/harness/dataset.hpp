#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aqp/harness/config.hpp"

namespace aqp::harness {

// Deterministic in (spec, seed). Tuple ids run first_id, first_id+1, ...
std::vector<TupleRow> generate_dataset(const DatasetSpec& spec, std::uint64_t seed);

// FNV-1a over ids, payload sizes and attributes; hex string.
std::string dataset_checksum(const std::vector<TupleRow>& rows);

}  // namespace aqp::harness
