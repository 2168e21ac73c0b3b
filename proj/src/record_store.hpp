#pragma once

#include "digest.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ctcal::campaign {

enum class TestItem : std::uint8_t {
  Precondition = 1,
  Insulation = 2,
  Withstand = 3,
  Polarity = 4,
  ErrorPoint = 5,
  Measurement = 6,
};

const char* to_string(TestItem item);

struct TestRecord {
  std::uint64_t record_id = 0;
  std::int64_t timestamp = 0;  // UTC seconds
  TestItem item = TestItem::Measurement;
  std::string payload;  // item-specific JSON
  Digest prior_hash{};  // all-zero on input means "fill from the chain head"

  bool operator==(const TestRecord&) const = default;
};

struct ChainCheck {
  bool valid = false;
  std::size_t records = 0;
  std::string error;
};

/// Append-only, tamper-evident store of test records.
///
/// File layout: 8-byte magic "CTRECv1\0", one length byte and the digest name
/// ("sha256"), then per record a u32 little-endian length followed by the
/// record body:
///   u64 id | i64 timestamp | u8 item | u32 payload length | payload |
///   32-byte prior digest | 32-byte digest of everything before it
/// Record 1 chains to the digest of the empty string.
class RecordStore {
 public:
  RecordStore() = default;

  /// Creates a new, empty file-backed store. Fails if the file exists.
  static RecordStore create(const std::filesystem::path& path);
  /// Loads and verifies an existing store; appends go to the same file.
  static RecordStore open(const std::filesystem::path& path);
  /// Parses and verifies serialized bytes; throws Integrity on any defect.
  static RecordStore parse(std::span<const std::uint8_t> bytes);

  /// Appends `record`, whose id must be exactly last_id() + 1.
  const TestRecord& append(TestRecord record);

  const std::vector<TestRecord>& records() const { return records_; }
  std::uint64_t last_id() const { return records_.empty() ? 0 : records_.back().record_id; }
  Digest head_digest() const;
  std::vector<std::uint8_t> serialize() const;

  static Digest genesis_digest();
  static Digest record_digest(const TestRecord& record);

 private:
  std::vector<TestRecord> records_;
  std::vector<Digest> digests_;
  std::optional<std::filesystem::path> path_;
};

ChainCheck verify_chain(std::span<const std::uint8_t> bytes);

}  // namespace ctcal::campaign
