#include "record_store.hpp"

#include "error.hpp"
#include "file_io.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace ctcal::campaign {

namespace {

constexpr std::uint8_t kMagic[8] = {'C', 'T', 'R', 'E', 'C', 'v', '1', '\0'};
constexpr std::size_t kFixedBody = 8 + 8 + 1 + 4 + 32 + 32;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(static_cast<std::uint64_t>(v) >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> bytes, std::size_t offset) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[offset + i]) << (8 * i);
  return static_cast<T>(v);
}

std::vector<std::uint8_t> header_bytes() {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(static_cast<std::uint8_t>(kDigestName.size()));
  out.insert(out.end(), kDigestName.begin(), kDigestName.end());
  return out;
}

// Body without the trailing self digest.
std::vector<std::uint8_t> unsigned_body(const TestRecord& r) {
  std::vector<std::uint8_t> out;
  out.reserve(kFixedBody + r.payload.size());
  put_le<std::uint64_t>(out, r.record_id);
  put_le<std::int64_t>(out, r.timestamp);
  out.push_back(static_cast<std::uint8_t>(r.item));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(r.payload.size()));
  out.insert(out.end(), r.payload.begin(), r.payload.end());
  out.insert(out.end(), r.prior_hash.begin(), r.prior_hash.end());
  return out;
}

std::vector<std::uint8_t> framed(const TestRecord& r, const Digest& self) {
  std::vector<std::uint8_t> body = unsigned_body(r);
  body.insert(body.end(), self.begin(), self.end());
  std::vector<std::uint8_t> out;
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(body.size()));
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

bool valid_item(std::uint8_t v) { return v >= 1 && v <= 6; }

[[noreturn]] void corrupt(const std::string& why) { throw Error(ErrorCode::Integrity, "record store: " + why); }

}  // namespace

const char* to_string(TestItem item) {
  switch (item) {
    case TestItem::Precondition: return "precondition";
    case TestItem::Insulation: return "insulation";
    case TestItem::Withstand: return "withstand";
    case TestItem::Polarity: return "polarity";
    case TestItem::ErrorPoint: return "error-point";
    case TestItem::Measurement: return "measurement";
  }
  return "unknown";
}

Digest RecordStore::genesis_digest() { return sha256(std::string_view{}); }

Digest RecordStore::record_digest(const TestRecord& record) { return sha256(unsigned_body(record)); }

Digest RecordStore::head_digest() const { return digests_.empty() ? genesis_digest() : digests_.back(); }

RecordStore RecordStore::create(const std::filesystem::path& path) {
  if (std::filesystem::exists(path)) throw Error(ErrorCode::Io, "record store already exists: " + path.string());
  write_bytes(path, header_bytes());
  RecordStore s;
  s.path_ = path;
  return s;
}

RecordStore RecordStore::open(const std::filesystem::path& path) {
  RecordStore s = parse(read_bytes(path));
  s.path_ = path;
  return s;
}

RecordStore RecordStore::parse(std::span<const std::uint8_t> bytes) {
  const auto header = header_bytes();
  if (bytes.size() < header.size() || !std::equal(header.begin(), header.end(), bytes.begin())) {
    corrupt("bad header or unsupported digest");
  }
  RecordStore s;
  std::size_t pos = header.size();
  while (pos < bytes.size()) {
    if (bytes.size() - pos < 4) corrupt("truncated length prefix");
    const auto len = get_le<std::uint32_t>(bytes, pos);
    pos += 4;
    if (len < kFixedBody || bytes.size() - pos < len) corrupt("record length out of bounds");
    const auto body = bytes.subspan(pos, len);
    pos += len;

    TestRecord r;
    r.record_id = get_le<std::uint64_t>(body, 0);
    r.timestamp = get_le<std::int64_t>(body, 8);
    if (!valid_item(body[16])) corrupt("unknown test item code");
    r.item = static_cast<TestItem>(body[16]);
    const auto payload_len = get_le<std::uint32_t>(body, 17);
    if (static_cast<std::size_t>(payload_len) + kFixedBody != len) corrupt("payload length disagrees with frame");
    r.payload.assign(reinterpret_cast<const char*>(body.data() + 21), payload_len);
    std::copy_n(body.begin() + 21 + payload_len, 32, r.prior_hash.begin());
    Digest stored{};
    std::copy_n(body.begin() + 21 + payload_len + 32, 32, stored.begin());

    if (r.record_id != s.last_id() + 1) corrupt("record id " + std::to_string(r.record_id) + " out of sequence");
    if (r.prior_hash != s.head_digest()) corrupt("broken chain at record " + std::to_string(r.record_id));
    const Digest computed = sha256(body.first(len - 32));
    if (computed != stored) corrupt("digest mismatch at record " + std::to_string(r.record_id));
    s.records_.push_back(std::move(r));
    s.digests_.push_back(computed);
  }
  return s;
}

const TestRecord& RecordStore::append(TestRecord record) {
  if (record.record_id != last_id() + 1) {
    throw Error(ErrorCode::Integrity, "append rejected: record id " + std::to_string(record.record_id) +
                                          " is not the successor of " + std::to_string(last_id()));
  }
  const Digest head = head_digest();
  if (record.prior_hash == Digest{}) {
    record.prior_hash = head;
  } else if (record.prior_hash != head) {
    throw Error(ErrorCode::Integrity, "append rejected: prior hash does not match the chain head");
  }
  if (record.payload.size() > 0xffff'ff00u) throw Error(ErrorCode::InvalidArgument, "record payload too large");
  const Digest self = record_digest(record);
  if (path_) {
    const auto bytes = framed(record, self);
    std::ofstream out(*path_, std::ios::binary | std::ios::app);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "cannot append to " + path_->string());
  }
  records_.push_back(std::move(record));
  digests_.push_back(self);
  return records_.back();
}

std::vector<std::uint8_t> RecordStore::serialize() const {
  std::vector<std::uint8_t> out = header_bytes();
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto f = framed(records_[i], digests_[i]);
    out.insert(out.end(), f.begin(), f.end());
  }
  return out;
}

ChainCheck verify_chain(std::span<const std::uint8_t> bytes) {
  try {
    const RecordStore s = RecordStore::parse(bytes);
    return {true, s.records().size(), {}};
  } catch (const Error& e) {
    return {false, 0, e.what()};
  }
}

}  // namespace ctcal::campaign
