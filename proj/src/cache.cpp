#include "aqp/cache.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <mutex>

#include "aqp/errors.hpp"

namespace aqp {

namespace {

void put_u64(std::uint8_t* p, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(const std::uint8_t* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

}  // namespace

std::size_t CacheKeyHash::operator()(const CacheKey& k) const noexcept {
  return static_cast<std::size_t>(k.udf_name_hash * 0x9e3779b97f4a7c15ULL ^ k.tuple_id);
}

std::uint64_t VerdictCache::name_hash(std::string_view udf_name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : udf_name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

VerdictCache::VerdictCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  load();
  out_ = std::fopen(path_.c_str(), "ab");
  if (!out_) throw CacheIoError("cannot open cache file for append: " + path_.string());
}

VerdictCache::~VerdictCache() {
  if (out_) std::fclose(out_);
}

void VerdictCache::load() {
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // fresh store
  std::vector<std::uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::uint64_t pos = 0;
  const std::uint64_t n = data.size();
  while (pos < n) {
    if (data[pos] != kCacheRecordMagic || n - pos < kCacheRecordHeader) break;
    const std::uint8_t* rec = data.data() + pos;
    CacheKey key{get_u64(rec + 1), get_u64(rec + 9)};
    std::uint8_t flags = rec[17];
    std::uint8_t verdict = rec[18];
    std::uint64_t len = kCacheRecordHeader;
    if (flags & 1u) {
      if (n - pos < len + 4) break;
      std::uint32_t plen = get_u32(rec + len);
      len += 4;
      if (n - pos < len + plen) break;
      len += plen;
    }
    index_[key] = Entry{pos, verdict != 0, (flags & 1u) != 0};
    pos += len;
  }
  end_offset_ = pos;
  if (pos < n) {
    truncated_bytes_ = n - pos;
    in.close();
    std::filesystem::resize_file(path_, pos);
  }
}

void VerdictCache::put(const CacheKey& key, bool verdict, std::span<const std::uint8_t> payload) {
  std::vector<std::uint8_t> rec(kCacheRecordHeader);
  rec[0] = kCacheRecordMagic;
  put_u64(rec.data() + 1, key.udf_name_hash);
  put_u64(rec.data() + 9, key.tuple_id);
  rec[17] = payload.empty() ? 0 : 1;
  rec[18] = verdict ? 1 : 0;
  if (!payload.empty()) {
    auto len = static_cast<std::uint32_t>(payload.size());
    for (int i = 0; i < 4; ++i) rec.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
    rec.insert(rec.end(), payload.begin(), payload.end());
  }
  std::unique_lock lock(mu_);
  if (std::fwrite(rec.data(), 1, rec.size(), out_) != rec.size()) {
    throw CacheIoError("short write to " + path_.string());
  }
  index_[key] = Entry{end_offset_, verdict, !payload.empty()};
  end_offset_ += rec.size();
}

void VerdictCache::flush() {
  std::unique_lock lock(mu_);
  if (std::fflush(out_) != 0) throw CacheIoError("flush failed for " + path_.string());
}

std::optional<bool> VerdictCache::get(const CacheKey& key) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second.verdict;
}

std::optional<std::vector<std::uint8_t>> VerdictCache::get_payload(const CacheKey& key) const {
  Entry e;
  {
    std::shared_lock lock(mu_);
    auto it = index_.find(key);
    if (it == index_.end() || !it->second.has_payload) return std::nullopt;
    e = it->second;
  }
  std::unique_lock lock(mu_);
  std::fflush(out_);
  std::ifstream in(path_, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(e.offset + kCacheRecordHeader));
  std::array<std::uint8_t, 4> lenbuf{};
  in.read(reinterpret_cast<char*>(lenbuf.data()), 4);
  std::vector<std::uint8_t> out(get_u32(lenbuf.data()));
  in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!in) throw CacheIoError("cannot read payload from " + path_.string());
  return out;
}

double VerdictCache::probe_hit_rate(const RoutingBatch& batch, std::string_view udf_name) const {
  if (batch.rows.empty()) return 0.0;
  const std::uint64_t h = name_hash(udf_name);
  std::size_t hits = 0;
  std::shared_lock lock(mu_);
  for (const auto& row : batch.rows) {
    if (index_.contains(CacheKey{h, row.tuple_id})) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(batch.rows.size());
}

std::size_t VerdictCache::preload(std::span<const TupleRange> ranges, std::string_view udf_name,
                                  const std::function<bool(TupleId)>& verdict) {
  const std::uint64_t h = name_hash(udf_name);
  std::size_t written = 0;
  for (const auto& r : ranges) {
    for (TupleId id = r.begin; id < r.end; ++id) {
      put(CacheKey{h, id}, verdict(id));
      ++written;
    }
  }
  flush();
  return written;
}

std::size_t VerdictCache::size() const {
  std::shared_lock lock(mu_);
  return index_.size();
}

}  // namespace aqp
