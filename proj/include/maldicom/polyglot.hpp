#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "maldicom/dicom.hpp"
#include "maldicom/pe.hpp"

namespace maldicom::polyglot {

inline constexpr dicom::Tag kDefaultPayloadTag{0x0009, 0x1001};

struct InjectionRecord {
    dicom::Tag payload_tag = kDefaultPayloadTag;
    std::uint32_t original_e_lfanew = 0;
    std::uint32_t new_e_lfanew = 0;
    std::uint32_t stub_truncated_bytes = 0;
    std::uint64_t pe_body_offset = 0; // offset of "PE\0\0" in the output
    std::int64_t rebase_delta = 0;
    std::uint32_t padding_len = 0;    // zero bytes before "PE\0\0" inside the element value
};

std::string record_to_json(const InjectionRecord& r);
InjectionRecord record_from_json(const std::string& json);

// Builds a file that parses both as DICOM and as PE:
//   bytes 0..128   DOS header + as much stub as fits, zero padded
//   bytes 128..132 "DICM"
//   meta elements unchanged, then the payload element holding the rebased
//   PE body (from "PE\0\0" onward), then the original body elements.
// e_lfanew at offset 60 is rewritten to point at the relocated signature.
std::pair<std::vector<std::uint8_t>, InjectionRecord>
create_pe_dicom(std::span<const std::uint8_t> pe_bytes,
                std::span<const std::uint8_t> dicom_bytes,
                dicom::Tag payload_tag = kDefaultPayloadTag);

// Inverse of create_pe_dicom. Recovers the original PE byte-for-byte except
// stub bytes lost to preamble truncation (zero-filled, count in the record).
std::vector<std::uint8_t> extract_pe(std::span<const std::uint8_t> polyglot_bytes,
                                     const InjectionRecord& record);

struct PolyglotCheck {
    bool is_dicom = false;
    bool is_pe = false;
    bool e_lfanew_target_is_pe_sig = false;

    bool all_true() const noexcept { return is_dicom && is_pe && e_lfanew_target_is_pe_sig; }
};

// Runs both parsers; never throws, failures become false flags.
PolyglotCheck verify_polyglot(std::span<const std::uint8_t> bytes) noexcept;

} // namespace maldicom::polyglot
