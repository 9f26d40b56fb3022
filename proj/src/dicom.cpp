#include "maldicom/dicom.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstring>

namespace maldicom::dicom {

namespace {

constexpr std::uint32_t kUndefinedLength = 0xFFFFFFFFu;
constexpr std::uint8_t kMagic[4] = {'D', 'I', 'C', 'M'};

// VRs that use the 12-byte header form (2 reserved bytes + 32-bit length).
bool is_long_form_vr(const std::string& vr) {
    return vr == "OB" || vr == "OD" || vr == "OF" || vr == "OL" || vr == "OW" ||
           vr == "SQ" || vr == "UC" || vr == "UN" || vr == "UR" || vr == "UT";
}

bool is_known_vr(char a, char b) {
    static const char* codes[] = {
        "AE", "AS", "AT", "CS", "DA", "DS", "DT", "FL", "FD", "IS", "LO", "LT",
        "OB", "OD", "OF", "OL", "OW", "PN", "SH", "SL", "SQ", "SS", "ST", "TM",
        "UC", "UI", "UL", "UN", "UR", "US", "UT",
    };
    for (const char* c : codes) {
        if (c[0] == a && c[1] == b) return true;
    }
    return false;
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint16_t>(b[off] | (b[off + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

void write_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void write_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

struct Cursor {
    std::span<const std::uint8_t> bytes;
    std::size_t pos;

    std::size_t remaining() const { return bytes.size() - pos; }
};

// Finds the end of an undefined-length value: the (FFFE,E0DD) sequence
// delimitation item with zero length. The run is kept opaque, not descended
// into. Returns the offset of the delimiter relative to cur.pos.
std::size_t find_sequence_delimiter(const Cursor& cur) {
    std::size_t p = cur.pos;
    while (p + 8 <= cur.bytes.size()) {
        if (cur.bytes[p] == 0xFE && cur.bytes[p + 1] == 0xFF && cur.bytes[p + 2] == 0xDD &&
            cur.bytes[p + 3] == 0xE0 && read_u32(cur.bytes, p + 4) == 0) {
            return p - cur.pos;
        }
        ++p;
    }
    throw Error(ErrorCode::TruncatedElement, "undefined-length element without delimiter");
}

DataElement parse_element(Cursor& cur, bool explicit_vr) {
    if (cur.remaining() < 8) {
        throw Error(ErrorCode::TruncatedElement, "element header past end of input");
    }
    DataElement e;
    e.tag.group = read_u16(cur.bytes, cur.pos);
    e.tag.element = read_u16(cur.bytes, cur.pos + 2);
    cur.pos += 4;

    std::uint32_t length = 0;
    if (explicit_vr) {
        if (cur.remaining() < 4) {
            throw Error(ErrorCode::TruncatedElement, "element VR past end of input");
        }
        e.vr = {static_cast<char>(cur.bytes[cur.pos]), static_cast<char>(cur.bytes[cur.pos + 1])};
        cur.pos += 2;
        if (is_long_form_vr(e.vr)) {
            if (cur.remaining() < 6) {
                throw Error(ErrorCode::TruncatedElement, "long-form length past end of input");
            }
            cur.pos += 2; // reserved
            length = read_u32(cur.bytes, cur.pos);
            cur.pos += 4;
        } else {
            length = read_u16(cur.bytes, cur.pos);
            cur.pos += 2;
        }
    } else {
        if (cur.remaining() < 4) {
            throw Error(ErrorCode::TruncatedElement, "element length past end of input");
        }
        length = read_u32(cur.bytes, cur.pos);
        cur.pos += 4;
    }

    e.value_offset = cur.pos;
    if (length == kUndefinedLength) {
        e.undefined_length = true;
        std::size_t run = find_sequence_delimiter(cur);
        e.value.assign(cur.bytes.begin() + cur.pos, cur.bytes.begin() + cur.pos + run);
        e.original_length = static_cast<std::uint32_t>(run);
        cur.pos += run + 8; // skip the delimitation item too
    } else {
        if (length > cur.remaining()) {
            throw Error(ErrorCode::TruncatedElement,
                        "declared length " + std::to_string(length) + " exceeds remaining " +
                            std::to_string(cur.remaining()));
        }
        e.value.assign(cur.bytes.begin() + cur.pos, cur.bytes.begin() + cur.pos + length);
        e.original_length = length;
        cur.pos += length;
    }
    return e;
}

void serialize_element(std::vector<std::uint8_t>& out, const DataElement& e, bool explicit_vr) {
    write_u16(out, e.tag.group);
    write_u16(out, e.tag.element);
    std::uint32_t length =
        e.undefined_length ? kUndefinedLength : static_cast<std::uint32_t>(e.value.size());
    if (explicit_vr) {
        if (e.vr.size() != 2) {
            throw Error(ErrorCode::InvariantViolation,
                        "element " + tag_to_string(e.tag) + " lacks a VR in explicit mode");
        }
        out.push_back(static_cast<std::uint8_t>(e.vr[0]));
        out.push_back(static_cast<std::uint8_t>(e.vr[1]));
        if (is_long_form_vr(e.vr)) {
            write_u16(out, 0);
            write_u32(out, length);
        } else {
            if (!e.undefined_length && e.value.size() > 0xFFFF) {
                throw Error(ErrorCode::InvariantViolation,
                            "short-form VR value exceeds 16-bit length");
            }
            write_u16(out, static_cast<std::uint16_t>(length));
        }
    } else {
        write_u32(out, length);
    }
    out.insert(out.end(), e.value.begin(), e.value.end());
    if (e.undefined_length) {
        // sequence delimitation item
        write_u16(out, 0xFFFE);
        write_u16(out, 0xE0DD);
        write_u32(out, 0);
    }
}

std::string trimmed_uid(const DataElement& e) {
    std::string s(e.value.begin(), e.value.end());
    while (!s.empty() && (s.back() == '\0' || s.back() == ' ')) s.pop_back();
    return s;
}

constexpr const char* kImplicitVrLeUid = "1.2.840.10008.1.2";
constexpr const char* kExplicitVrLeUid = "1.2.840.10008.1.2.1";

} // namespace

std::string tag_to_string(Tag t) {
    char buf[12];
    std::snprintf(buf, sizeof(buf), "(%04x,%04x)", t.group, t.element);
    return buf;
}

std::optional<Tag> tag_from_string(const std::string& s) {
    unsigned g = 0, e = 0;
    std::string cleaned;
    for (char c : s) {
        if (c != '(' && c != ')' && c != ' ') cleaned.push_back(c);
    }
    if (std::sscanf(cleaned.c_str(), "%4x,%4x", &g, &e) != 2) return std::nullopt;
    return Tag{static_cast<std::uint16_t>(g), static_cast<std::uint16_t>(e)};
}

DataElement make_element(Tag tag, std::string vr, std::vector<std::uint8_t> value) {
    DataElement e;
    e.tag = tag;
    e.vr = std::move(vr);
    e.original_length = static_cast<std::uint32_t>(value.size());
    if (value.size() % 2 != 0) value.push_back(0x00);
    e.value = std::move(value);
    return e;
}

DicomFile parse_dicom(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kMinFileSize) {
        throw Error(ErrorCode::TooShort,
                    "need at least 132 bytes, got " + std::to_string(bytes.size()));
    }
    if (std::memcmp(bytes.data() + kMagicOffset, kMagic, 4) != 0) {
        throw Error(ErrorCode::BadMagic, "bytes 128..132 are not \"DICM\"");
    }

    DicomFile f;
    std::copy(bytes.begin(), bytes.begin() + kPreambleSize, f.preamble.begin());

    Cursor cur{bytes, kMinFileSize};

    // The meta group is always explicit VR little endian.
    while (cur.remaining() >= 8 && read_u16(cur.bytes, cur.pos) == 0x0002) {
        f.meta_elements.push_back(parse_element(cur, /*explicit_vr=*/true));
    }

    // Body syntax: transfer syntax UID when present, VR sniffing otherwise.
    bool explicit_body = true;
    if (const DataElement* ts = get_element(f, Tag{0x0002, 0x0010})) {
        std::string uid = trimmed_uid(*ts);
        if (uid == kImplicitVrLeUid) {
            explicit_body = false;
        } else if (uid == kExplicitVrLeUid) {
            explicit_body = true;
        } else {
            throw Error(ErrorCode::UnsupportedTransferSyntax, uid);
        }
    } else if (cur.remaining() >= 6) {
        explicit_body = is_known_vr(static_cast<char>(cur.bytes[cur.pos + 4]),
                                    static_cast<char>(cur.bytes[cur.pos + 5]));
    }
    f.transfer_syntax =
        explicit_body ? TransferSyntax::ExplicitVRLittleEndian : TransferSyntax::ImplicitVRLittleEndian;

    while (cur.remaining() > 0) {
        f.body_elements.push_back(parse_element(cur, explicit_body));
    }
    return f;
}

std::vector<std::uint8_t> serialize_dicom(const DicomFile& f) {
    std::vector<std::uint8_t> out;
    out.reserve(kMinFileSize);
    out.insert(out.end(), f.preamble.begin(), f.preamble.end());
    out.insert(out.end(), kMagic, kMagic + 4);

    // Recompute (0002,0000): byte length of the meta elements that follow it.
    std::vector<DataElement> meta = f.meta_elements;
    for (std::size_t i = 0; i < meta.size(); ++i) {
        if (meta[i].tag == Tag{0x0002, 0x0000}) {
            std::size_t rest = 0;
            for (std::size_t j = i + 1; j < meta.size(); ++j) {
                rest += serialized_element_size(meta[j], TransferSyntax::ExplicitVRLittleEndian);
            }
            std::vector<std::uint8_t> v(4);
            std::uint32_t n = static_cast<std::uint32_t>(rest);
            v[0] = n & 0xFF; v[1] = (n >> 8) & 0xFF; v[2] = (n >> 16) & 0xFF; v[3] = (n >> 24) & 0xFF;
            meta[i].value = std::move(v);
            meta[i].original_length = 4;
        }
    }
    for (const DataElement& e : meta) {
        if (e.tag.group != 0x0002) {
            throw Error(ErrorCode::InvariantViolation,
                        "meta element " + tag_to_string(e.tag) + " outside group 0002");
        }
        serialize_element(out, e, /*explicit_vr=*/true);
    }
    bool explicit_body = f.transfer_syntax == TransferSyntax::ExplicitVRLittleEndian;
    for (const DataElement& e : f.body_elements) {
        serialize_element(out, e, explicit_body);
    }
    return out;
}

const DataElement* get_element(const DicomFile& f, Tag t) {
    for (const DataElement& e : f.meta_elements) {
        if (e.tag == t) return &e;
    }
    for (const DataElement& e : f.body_elements) {
        if (e.tag == t) return &e;
    }
    return nullptr;
}

DicomFile upsert_element(const DicomFile& f, DataElement e) {
    if (e.value.size() % 2 != 0) {
        throw Error(ErrorCode::InvariantViolation,
                    "odd-length value for " + tag_to_string(e.tag) + "; use make_element");
    }
    DicomFile out = f;
    auto& list = (e.tag.group == 0x0002) ? out.meta_elements : out.body_elements;
    auto it = std::find_if(list.begin(), list.end(),
                           [&](const DataElement& x) { return x.tag == e.tag; });
    if (it != list.end()) {
        *it = std::move(e);
        return out;
    }
    auto pos = std::find_if(list.begin(), list.end(),
                            [&](const DataElement& x) { return e.tag < x.tag; });
    list.insert(pos, std::move(e));
    return out;
}

std::size_t serialized_element_size(const DataElement& e, TransferSyntax ts) {
    std::size_t header;
    if (ts == TransferSyntax::ExplicitVRLittleEndian) {
        header = is_long_form_vr(e.vr) ? 12 : 8;
    } else {
        header = 8;
    }
    return header + e.value.size() + (e.undefined_length ? 8 : 0);
}

std::size_t meta_info_size(const DicomFile& f) {
    std::size_t total = 0;
    for (const DataElement& e : f.meta_elements) {
        total += serialized_element_size(e, TransferSyntax::ExplicitVRLittleEndian);
    }
    return total;
}

} // namespace maldicom::dicom
