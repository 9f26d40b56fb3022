#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maldicom/errors.hpp"

namespace maldicom::dicom {

// First 128 bytes of a Part-10 file. Content-free by standard; serialized verbatim.
inline constexpr std::size_t kPreambleSize = 128;
inline constexpr std::size_t kMagicOffset = 128;
inline constexpr std::size_t kMinFileSize = 132;

using Preamble = std::array<std::uint8_t, kPreambleSize>;

struct Tag {
    std::uint16_t group = 0;
    std::uint16_t element = 0;

    auto operator<=>(const Tag&) const = default;

    // Odd group numbers are private tags; even are public.
    bool is_private() const noexcept { return (group & 1u) != 0; }
    bool is_public() const noexcept { return !is_private(); }
};

std::string tag_to_string(Tag t);
std::optional<Tag> tag_from_string(const std::string& s);

enum class TransferSyntax {
    ExplicitVRLittleEndian,
    ImplicitVRLittleEndian,
};

struct DataElement {
    Tag tag;
    std::string vr;                   // two chars in explicit mode, empty in implicit mode
    std::vector<std::uint8_t> value;  // even length on disk (padded)
    std::uint32_t original_length = 0; // pre-padding length; == value.size() unless padded
    bool undefined_length = false;     // element declared 0xFFFFFFFF; value holds the raw run
    std::uint64_t value_offset = 0;    // file offset of the value in the parsed source, 0 if built

    bool padded() const noexcept { return original_length != value.size(); }
};

// Builds an element, padding odd-length values with one 0x00 per the even-length rule.
DataElement make_element(Tag tag, std::string vr, std::vector<std::uint8_t> value);

struct DicomFile {
    Preamble preamble{};
    std::vector<DataElement> meta_elements; // group 0x0002, before the body
    std::vector<DataElement> body_elements;
    TransferSyntax transfer_syntax = TransferSyntax::ExplicitVRLittleEndian;
};

// Parses a Part-10 stream: 128-byte preamble, "DICM", then data elements.
// Explicit VR little endian primary, implicit VR fallback when the VR bytes
// are not valid VR codes. Throws Error{TooShort, BadMagic, TruncatedElement,
// UnsupportedTransferSyntax}.
DicomFile parse_dicom(std::span<const std::uint8_t> bytes);

// Emits preamble, "DICM", meta then body elements. Recomputes the group-length
// element (0002,0000) when present. Round trips byte-exactly with parse_dicom.
std::vector<std::uint8_t> serialize_dicom(const DicomFile& f);

// First element with tag t, searching meta then body; nullptr if absent.
const DataElement* get_element(const DicomFile& f, Tag t);

// Inserts e preserving tag order within its list, replacing an existing
// element with the same tag. Returns a new file; f is untouched.
DicomFile upsert_element(const DicomFile& f, DataElement e);

// Serialized byte length of the meta group (bytes between "DICM" and the
// first body element).
std::size_t meta_info_size(const DicomFile& f);

// Serialized length of one element (header + value + delimiters).
std::size_t serialized_element_size(const DataElement& e, TransferSyntax ts);

} // namespace maldicom::dicom
