#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "maldicom/errors.hpp"

namespace maldicom::pe {

inline constexpr std::size_t kDosHeaderSize = 64;
inline constexpr std::size_t kPeHeaderSize = 24; // "PE\0\0" + 20-byte COFF header
inline constexpr std::size_t kELfanewOffset = 60;
inline constexpr std::size_t kSectionEntrySize = 40;
inline constexpr std::size_t kMinFileSize = kDosHeaderSize + kPeHeaderSize;

struct DosHeader {
    std::array<std::uint8_t, kDosHeaderSize> bytes{};

    std::uint32_t e_lfanew() const noexcept;
    void set_e_lfanew(std::uint32_t v) noexcept;
};

struct SectionEntry {
    std::array<std::uint8_t, 8> name{};
    std::uint32_t raw_size = 0;
    std::uint32_t raw_pointer = 0;   // PointerToRawData
    std::uint64_t header_offset = 0; // file offset of this 40-byte entry
};

// Lossless decomposition of a PE image. Concatenating
// dos_header ++ dos_stub ++ pe_header ++ remainder reproduces the input.
struct PeView {
    DosHeader dos_header;
    std::vector<std::uint8_t> dos_stub;             // e_lfanew - 64 bytes
    std::array<std::uint8_t, kPeHeaderSize> pe_header{};
    std::vector<SectionEntry> sections;             // parsed out of remainder
    std::vector<std::uint8_t> remainder;            // optional header + tables + raw data
};

// Throws Error{BadMzMagic, BadPeSignature, ELfanewOutOfRange, MalformedSectionTable}.
PeView parse_pe(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> reassemble(const PeView& p);

// dos_part = header ++ stub; rest = everything from "PE\0\0" onward.
std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>> snip_dos_from_pe(const PeView& p);

std::vector<std::uint8_t> snip_remaining_from_pe(const PeView& p);

// Shifts every nonzero PointerToRawData in the section table of a region that
// starts with "PE\0\0". Virtual addresses are left alone. Throws
// Error{BadPeSignature, NegativeOffset, MalformedSectionTable}.
std::vector<std::uint8_t> rebase_sections(std::span<const std::uint8_t> pe_region,
                                          std::int64_t delta);

} // namespace maldicom::pe
