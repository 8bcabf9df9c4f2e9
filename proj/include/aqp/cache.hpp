#pragma once

// Append-only on-disk store for UDF verdicts.
//
// Record layout (little endian):
//   0xC5 | udf_name_hash u64 | tuple_id u64 | flags u8 | verdict u8 | [payload_len u32 | payload]
// flags bit0 marks a payload. The last record for a key wins. A torn record at
// the tail is dropped (and truncated away) on open. Lookups and probes are
// served from the in-memory index and never touch the file.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "aqp/core.hpp"

namespace aqp {

struct CacheKey {
  std::uint64_t udf_name_hash = 0;
  TupleId tuple_id = 0;
  friend bool operator==(const CacheKey&, const CacheKey&) = default;
};

struct CacheKeyHash {
  std::size_t operator()(const CacheKey& k) const noexcept;
};

inline constexpr std::uint8_t kCacheRecordMagic = 0xC5;
inline constexpr std::size_t kCacheRecordHeader = 1 + 16 + 1 + 1;

class VerdictCache {
 public:
  // Opens (creating if needed) the log at path and rebuilds the index.
  explicit VerdictCache(std::filesystem::path path);
  ~VerdictCache();

  VerdictCache(const VerdictCache&) = delete;
  VerdictCache& operator=(const VerdictCache&) = delete;

  // FNV-1a 64 of the udf name.
  static std::uint64_t name_hash(std::string_view udf_name);

  void put(const CacheKey& key, bool verdict, std::span<const std::uint8_t> payload = {});
  void flush();

  std::optional<bool> get(const CacheKey& key) const;
  std::optional<std::vector<std::uint8_t>> get_payload(const CacheKey& key) const;

  // Fraction of rows whose key is present; 0 for an empty batch.
  double probe_hit_rate(const RoutingBatch& batch, std::string_view udf_name) const;

  // Writes the udf's verdict for every tuple id in the ranges; returns records written.
  std::size_t preload(std::span<const TupleRange> ranges, std::string_view udf_name,
                      const std::function<bool(TupleId)>& verdict);

  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }
  // Bytes discarded from a torn tail at open.
  std::uint64_t recovered_truncation() const { return truncated_bytes_; }

 private:
  struct Entry {
    std::uint64_t offset = 0;
    bool verdict = false;
    bool has_payload = false;
  };

  void load();

  std::filesystem::path path_;
  std::FILE* out_ = nullptr;
  std::uint64_t end_offset_ = 0;
  std::uint64_t truncated_bytes_ = 0;
  mutable std::shared_mutex mu_;
  std::unordered_map<CacheKey, Entry, CacheKeyHash> index_;
};

}  // namespace aqp
