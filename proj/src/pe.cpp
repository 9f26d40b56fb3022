#include "maldicom/pe.hpp"

#include <algorithm>
#include <cstring>

namespace maldicom::pe {

namespace {

constexpr std::uint8_t kPeSig[4] = {'P', 'E', 0, 0};

// COFF header layout, relative to the "PE\0\0" signature.
constexpr std::size_t kNumberOfSectionsOffset = 6;       // u16
constexpr std::size_t kSizeOfOptionalHeaderOffset = 20;  // u16
constexpr std::size_t kSectionRawSizeOffset = 16;        // u32, within a 40-byte entry
constexpr std::size_t kSectionRawPointerOffset = 20;     // u32

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void write_u32_at(std::vector<std::uint8_t>& b, std::size_t off, std::uint32_t v) {
    b[off] = v & 0xFF;
    b[off + 1] = (v >> 8) & 0xFF;
    b[off + 2] = (v >> 16) & 0xFF;
    b[off + 3] = (v >> 24) & 0xFF;
}

// Section table location and entries for a region starting at "PE\0\0".
// base is the file offset of the region start, used for header_offset.
std::vector<SectionEntry> parse_section_table(std::span<const std::uint8_t> region,
                                              std::uint64_t base) {
    if (region.size() < kPeHeaderSize) {
        throw Error(ErrorCode::MalformedSectionTable, "region shorter than the PE header");
    }
    std::uint16_t n_sections = read_u16(region, kNumberOfSectionsOffset);
    std::uint16_t opt_size = read_u16(region, kSizeOfOptionalHeaderOffset);
    std::size_t table_start = kPeHeaderSize + opt_size;
    std::size_t table_end = table_start + std::size_t{n_sections} * kSectionEntrySize;
    if (table_end > region.size()) {
        throw Error(ErrorCode::MalformedSectionTable,
                    "section table extends past end of input");
    }
    std::vector<SectionEntry> sections;
    sections.reserve(n_sections);
    for (std::uint16_t i = 0; i < n_sections; ++i) {
        std::size_t off = table_start + std::size_t{i} * kSectionEntrySize;
        SectionEntry s;
        std::copy(region.begin() + off, region.begin() + off + 8, s.name.begin());
        s.raw_size = read_u32(region, off + kSectionRawSizeOffset);
        s.raw_pointer = read_u32(region, off + kSectionRawPointerOffset);
        s.header_offset = base + off;
        sections.push_back(s);
    }
    return sections;
}

} // namespace

std::uint32_t DosHeader::e_lfanew() const noexcept {
    return static_cast<std::uint32_t>(bytes[kELfanewOffset]) |
           (static_cast<std::uint32_t>(bytes[kELfanewOffset + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes[kELfanewOffset + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes[kELfanewOffset + 3]) << 24);
}

void DosHeader::set_e_lfanew(std::uint32_t v) noexcept {
    bytes[kELfanewOffset] = v & 0xFF;
    bytes[kELfanewOffset + 1] = (v >> 8) & 0xFF;
    bytes[kELfanewOffset + 2] = (v >> 16) & 0xFF;
    bytes[kELfanewOffset + 3] = (v >> 24) & 0xFF;
}

PeView parse_pe(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMinFileSize) {
        throw Error(ErrorCode::TooShort,
                    "need at least 88 bytes, got " + std::to_string(bytes.size()));
    }
    if (bytes[0] != 'M' || bytes[1] != 'Z') {
        throw Error(ErrorCode::BadMzMagic, "input does not start with MZ");
    }

    PeView p;
    std::copy(bytes.begin(), bytes.begin() + kDosHeaderSize, p.dos_header.bytes.begin());

    std::uint32_t e_lfanew = p.dos_header.e_lfanew();
    if (e_lfanew < kDosHeaderSize || std::uint64_t{e_lfanew} + 4 > bytes.size()) {
        throw Error(ErrorCode::ELfanewOutOfRange, "e_lfanew=" + std::to_string(e_lfanew));
    }
    if (std::memcmp(bytes.data() + e_lfanew, kPeSig, 4) != 0) {
        throw Error(ErrorCode::BadPeSignature, "no \"PE\\0\\0\" at e_lfanew");
    }
    if (std::uint64_t{e_lfanew} + kPeHeaderSize > bytes.size()) {
        throw Error(ErrorCode::TooShort, "COFF header truncated");
    }

    p.dos_stub.assign(bytes.begin() + kDosHeaderSize, bytes.begin() + e_lfanew);
    std::copy(bytes.begin() + e_lfanew, bytes.begin() + e_lfanew + kPeHeaderSize,
              p.pe_header.begin());
    p.remainder.assign(bytes.begin() + e_lfanew + kPeHeaderSize, bytes.end());

    p.sections = parse_section_table(bytes.subspan(e_lfanew), e_lfanew);
    for (const SectionEntry& s : p.sections) {
        if (s.raw_size > 0 &&
            std::uint64_t{s.raw_pointer} + s.raw_size > bytes.size()) {
            throw Error(ErrorCode::MalformedSectionTable,
                        "section raw data extends past end of file");
        }
    }
    return p;
}

std::vector<std::uint8_t> reassemble(const PeView& p) {
    std::vector<std::uint8_t> out;
    out.reserve(kDosHeaderSize + p.dos_stub.size() + kPeHeaderSize + p.remainder.size());
    out.insert(out.end(), p.dos_header.bytes.begin(), p.dos_header.bytes.end());
    out.insert(out.end(), p.dos_stub.begin(), p.dos_stub.end());
    out.insert(out.end(), p.pe_header.begin(), p.pe_header.end());
    out.insert(out.end(), p.remainder.begin(), p.remainder.end());
    return out;
}

std::pair<std::vector<std::uint8_t>, std::vector<std::uint8_t>>
snip_dos_from_pe(const PeView& p) {
    std::vector<std::uint8_t> dos_part;
    dos_part.reserve(kDosHeaderSize + p.dos_stub.size());
    dos_part.insert(dos_part.end(), p.dos_header.bytes.begin(), p.dos_header.bytes.end());
    dos_part.insert(dos_part.end(), p.dos_stub.begin(), p.dos_stub.end());
    return {std::move(dos_part), snip_remaining_from_pe(p)};
}

std::vector<std::uint8_t> snip_remaining_from_pe(const PeView& p) {
    std::vector<std::uint8_t> rest;
    rest.reserve(kPeHeaderSize + p.remainder.size());
    rest.insert(rest.end(), p.pe_header.begin(), p.pe_header.end());
    rest.insert(rest.end(), p.remainder.begin(), p.remainder.end());
    return rest;
}

std::vector<std::uint8_t> rebase_sections(std::span<const std::uint8_t> pe_region,
                                          std::int64_t delta) {
    if (pe_region.size() < 4 || std::memcmp(pe_region.data(), kPeSig, 4) != 0) {
        throw Error(ErrorCode::BadPeSignature, "region does not start with \"PE\\0\\0\"");
    }
    std::vector<SectionEntry> sections = parse_section_table(pe_region, 0);
    std::vector<std::uint8_t> out(pe_region.begin(), pe_region.end());
    for (const SectionEntry& s : sections) {
        if (s.raw_pointer == 0) continue;
        std::int64_t moved = static_cast<std::int64_t>(s.raw_pointer) + delta;
        if (moved < 0) {
            throw Error(ErrorCode::NegativeOffset,
                        "raw pointer " + std::to_string(s.raw_pointer) + " + delta " +
                            std::to_string(delta) + " is negative");
        }
        write_u32_at(out, static_cast<std::size_t>(s.header_offset) + kSectionRawPointerOffset,
                     static_cast<std::uint32_t>(moved));
    }
    return out;
}

} // namespace maldicom::pe
