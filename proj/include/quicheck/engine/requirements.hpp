#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace quicheck {

enum class Severity : std::uint8_t { kRequired, kAdvisory };

struct Requirement {
  std::string id;
  std::string clause;
  Severity severity = Severity::kRequired;
  std::string description;
  // Transport error code a conformant endpoint closes with on detection.
  std::uint64_t error_code = 0;
};

// Requirement ids are plain strings validated against the registry; the
// constants below name the ones the engine emits.
namespace req {
inline constexpr std::string_view kCodecFailure = "CODEC_FAILURE";
inline constexpr std::string_view kPnMonotonic = "PKT_PN_MONOTONIC";
inline constexpr std::string_view kVersion = "PKT_VERSION";
inline constexpr std::string_view kReservedBits = "PKT_RESERVED_BITS";
inline constexpr std::string_view kInitialToken = "PKT_INITIAL_TOKEN";
inline constexpr std::string_view kCidLenMax = "CID_LEN_MAX";
inline constexpr std::string_view kFrameLevel = "FRAME_LEVEL_ILLEGAL";
inline constexpr std::string_view kUnknownFrame = "FRAME_UNKNOWN_TYPE";
inline constexpr std::string_view kRoleIllegalFrame = "ROLE_ILLEGAL_FRAME";
inline constexpr std::string_view kNewTokenEmpty = "NEW_TOKEN_EMPTY";
inline constexpr std::string_view kStreamOffsetRange = "STREAM_OFFSET_RANGE";
inline constexpr std::string_view kFlowControl = "FLOW_CONTROL";
inline constexpr std::string_view kFinalSize = "FINAL_SIZE";
inline constexpr std::string_view kStreamIdLimit = "STREAM_ID_LIMIT";
inline constexpr std::string_view kMaxStreamsRange = "MAX_STREAMS_RANGE";
inline constexpr std::string_view kStreamsBlockedRange = "STREAMS_BLOCKED_RANGE";
inline constexpr std::string_view kNcidLen = "NCID_LEN";
inline constexpr std::string_view kNcidRtp = "NCID_RTP";
inline constexpr std::string_view kNcidLimit = "NCID_LIMIT";
inline constexpr std::string_view kRcidUnknownSeq = "RCID_UNKNOWN_SEQ";
inline constexpr std::string_view kAckUnsent = "ACK_UNSENT";
inline constexpr std::string_view kAckOfAck = "ACK_OF_ACK";
inline constexpr std::string_view kPathResponseMismatch = "PATH_RESPONSE_MISMATCH";
inline constexpr std::string_view kTpDup = "TP_DUP";
inline constexpr std::string_view kTpInvalidValue = "TP_INVALID_VALUE";
inline constexpr std::string_view kTpMissingIcid = "TP_MISSING_ICID";
inline constexpr std::string_view kTpMissingOcid = "TP_MISSING_OCID";
inline constexpr std::string_view kTpRole = "TP_ROLE";
inline constexpr std::string_view kTpPrefaddCid = "TP_PREFADD_CID";
inline constexpr std::string_view kMigBeforeConfirmed = "MIG_BEFORE_CONFIRMED";
inline constexpr std::string_view kMigDisabled = "MIG_DISABLED";
inline constexpr std::string_view kMigAddrTarget = "MIG_ADDR_TARGET";
inline constexpr std::string_view kMigNoPathValidation = "MIG_NO_PATH_VALIDATION";
inline constexpr std::string_view kErrCodeExpected = "ERR_CODE_EXPECTED";
inline constexpr std::string_view kErrWrongLevel = "ERR_WRONG_LEVEL";
inline constexpr std::string_view kErrSilent = "ERR_SILENT";
inline constexpr std::string_view kErrNoReaction = "ERR_NO_REACTION";
inline constexpr std::string_view kErrUnexpectedClose = "ERR_UNEXPECTED_CLOSE";
inline constexpr std::string_view kFinalizeGoal = "FINALIZE_GOAL";
}  // namespace req

class RequirementRegistry {
 public:
  // Parses the JSON registry format documented in docs/formats.md.
  // Throws InputError on schema errors or duplicate ids.
  static RequirementRegistry parse(std::string_view json_text);
  static RequirementRegistry load_file(const std::string& path);

  bool contains(std::string_view id) const;
  // Throws std::out_of_range for unregistered ids.
  const Requirement& at(std::string_view id) const;
  bool is_advisory(std::string_view id) const { return at(id).severity == Severity::kAdvisory; }
  const std::vector<Requirement>& all() const noexcept { return records_; }

 private:
  std::vector<Requirement> records_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// The registry shipped with the tool (data/requirements.json).
const RequirementRegistry& default_registry();

}  // namespace quicheck
