#include "maldicom/detector.hpp"

#include "maldicom/pe.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace maldicom::detector {

namespace {

constexpr std::uint8_t kPeSig[4] = {'P', 'E', 0, 0};

bool all_zero(std::span<const std::uint8_t> b) {
    for (std::uint8_t x : b) {
        if (x != 0) return false;
    }
    return true;
}

// Legitimate dual-format preambles: TIFF headers let viewers treat the file
// as TIFF while staying a valid DICOM.
bool whitelisted_preamble(std::span<const std::uint8_t> p) {
    if (all_zero(p)) return true;
    static constexpr std::uint8_t tiff_le[4] = {'I', 'I', '*', 0};
    static constexpr std::uint8_t tiff_be[4] = {'M', 'M', 0, '*'};
    return p.size() >= 4 && (std::memcmp(p.data(), tiff_le, 4) == 0 ||
                             std::memcmp(p.data(), tiff_be, 4) == 0);
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

bool has_kind(const std::vector<Evidence>& ev, EvidenceKind k) {
    for (const Evidence& e : ev) {
        if (e.kind == k) return true;
    }
    return false;
}

Verdict verdict_from_evidence(const std::vector<Evidence>& ev) {
    if (has_kind(ev, EvidenceKind::MzMagicInPreamble) &&
        has_kind(ev, EvidenceKind::ELfanewTargetsPeSig)) {
        return Verdict::Polyglot;
    }
    return ev.empty() ? Verdict::Clean : Verdict::Suspicious;
}

} // namespace

const char* evidence_kind_name(EvidenceKind k) {
    switch (k) {
        case EvidenceKind::MzMagicInPreamble: return "MzMagicInPreamble";
        case EvidenceKind::ELfanewTargetsPeSig: return "ELfanewTargetsPeSig";
        case EvidenceKind::PeSigInPrivateTag: return "PeSigInPrivateTag";
        case EvidenceKind::HighPreambleEntropy: return "HighPreambleEntropy";
        case EvidenceKind::NonZeroNonWhitelistedPreamble: return "NonZeroNonWhitelistedPreamble";
    }
    return "Unknown";
}

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Clean: return "Clean";
        case Verdict::Suspicious: return "Suspicious";
        case Verdict::Polyglot: return "Polyglot";
    }
    return "Unknown";
}

std::string ScanReport::to_json() const {
    nlohmann::json ev = nlohmann::json::array();
    for (const Evidence& e : evidence) {
        ev.push_back({{"kind", evidence_kind_name(e.kind)},
                      {"offset", e.offset},
                      {"detail", e.detail}});
    }
    nlohmann::json j{
        {"path", path},
        {"verdict", verdict_name(verdict)},
        {"entropy_bits", entropy_bits},
        {"evidence", ev},
        {"bytes_read", bytes_read},
    };
    return j.dump();
}

double shannon_entropy(std::span<const std::uint8_t> window) {
    if (window.empty()) {
        throw Error(ErrorCode::EmptyWindow, "entropy of an empty window is undefined");
    }
    std::array<std::uint64_t, 256> counts{};
    for (std::uint8_t b : window) ++counts[b];
    const double n = static_cast<double>(window.size());
    double h = 0.0;
    for (std::uint64_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

std::vector<Evidence> scan_preamble(std::span<const std::uint8_t> file_bytes,
                                    double entropy_threshold) {
    std::vector<Evidence> ev;
    if (file_bytes.size() < dicom::kPreambleSize) return ev;
    auto preamble = file_bytes.first(dicom::kPreambleSize);

    if (preamble[0] == 'M' && preamble[1] == 'Z') {
        ev.push_back({EvidenceKind::MzMagicInPreamble, 0, "MZ magic at offset 0"});
    }
    std::uint32_t e_lfanew = read_u32(preamble, pe::kELfanewOffset);
    if (std::uint64_t{e_lfanew} + 4 <= file_bytes.size() &&
        std::memcmp(file_bytes.data() + e_lfanew, kPeSig, 4) == 0) {
        ev.push_back({EvidenceKind::ELfanewTargetsPeSig, e_lfanew,
                      "preamble e_lfanew field targets a PE signature"});
    }
    double h = shannon_entropy(preamble);
    if (h > entropy_threshold) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "preamble entropy %.3f bits/byte", h);
        ev.push_back({EvidenceKind::HighPreambleEntropy, 0, buf});
    }
    if (!whitelisted_preamble(preamble)) {
        ev.push_back({EvidenceKind::NonZeroNonWhitelistedPreamble, 0,
                      "preamble is neither zero nor a known dual-format header"});
    }
    return ev;
}

std::vector<Evidence> scan_private_tags(const dicom::DicomFile& f) {
    std::vector<Evidence> ev;
    auto scan_list = [&](const std::vector<dicom::DataElement>& elements) {
        for (const dicom::DataElement& e : elements) {
            if (!e.tag.is_private()) continue;
            const auto& v = e.value;
            if (v.size() >= 2 && v[0] == 'M' && v[1] == 'Z') {
                ev.push_back({EvidenceKind::PeSigInPrivateTag, e.value_offset,
                              "MZ magic at start of " + dicom::tag_to_string(e.tag)});
            }
            for (std::size_t i = 0; i + 4 <= v.size(); ++i) {
                if (std::memcmp(v.data() + i, kPeSig, 4) == 0) {
                    ev.push_back({EvidenceKind::PeSigInPrivateTag, e.value_offset + i,
                                  "PE signature in " + dicom::tag_to_string(e.tag) +
                                      " at value offset " + std::to_string(i)});
                    break;
                }
            }
        }
    };
    scan_list(f.meta_elements);
    scan_list(f.body_elements);
    return ev;
}

ScanReport classify_file(std::span<const std::uint8_t> bytes, const DetectorConfig& cfg) {
    ScanReport report;
    report.bytes_read = bytes.size();
    if (bytes.size() >= dicom::kPreambleSize) {
        report.entropy_bits = shannon_entropy(bytes.first(dicom::kPreambleSize));
    }
    report.evidence = scan_preamble(bytes, cfg.entropy_threshold);
    if (cfg.deep_scan) {
        try {
            dicom::DicomFile f = dicom::parse_dicom(bytes);
            auto tag_ev = scan_private_tags(f);
            report.evidence.insert(report.evidence.end(), tag_ev.begin(), tag_ev.end());
        } catch (const Error& e) {
            report.evidence.push_back(
                {EvidenceKind::NonZeroNonWhitelistedPreamble, 0,
                 std::string("unparseable as DICOM: ") + e.what()});
        }
    }
    report.verdict = verdict_from_evidence(report.evidence);
    return report;
}

ScanReport scan_path(const std::string& path, const DetectorConfig& cfg) {
    ScanReport report;
    report.path = path;

    std::ifstream in(path, std::ios::binary);
    if (!in) {
        report.verdict = Verdict::Suspicious;
        report.evidence.push_back(
            {EvidenceKind::NonZeroNonWhitelistedPreamble, 0, "unreadable file"});
        return report;
    }

    if (cfg.deep_scan) {
        std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
        report = classify_file(bytes, cfg);
        report.path = path;
        return report;
    }

    // Fast path: a fixed-size head read plus at most one 4-byte probe at the
    // e_lfanew target, so bytes_read never exceeds kFastPathByteBudget.
    std::vector<std::uint8_t> head(kFastPathByteBudget - 4);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    head.resize(static_cast<std::size_t>(in.gcount()));
    report.bytes_read = head.size();

    if (head.size() >= dicom::kPreambleSize) {
        auto preamble = std::span<const std::uint8_t>(head).first(dicom::kPreambleSize);
        report.entropy_bits = shannon_entropy(preamble);
        report.evidence = scan_preamble(head, cfg.entropy_threshold);

        // The head buffer cannot witness a far e_lfanew target; probe it directly.
        std::uint32_t e_lfanew = read_u32(preamble, pe::kELfanewOffset);
        if (std::uint64_t{e_lfanew} + 4 > head.size()) {
            in.clear();
            in.seekg(static_cast<std::streamoff>(e_lfanew));
            std::uint8_t sig[4];
            if (in.read(reinterpret_cast<char*>(sig), 4)) {
                report.bytes_read += 4;
                if (std::memcmp(sig, kPeSig, 4) == 0) {
                    report.evidence.push_back({EvidenceKind::ELfanewTargetsPeSig, e_lfanew,
                                               "preamble e_lfanew field targets a PE signature"});
                }
            }
        }
    } else {
        report.evidence.push_back({EvidenceKind::NonZeroNonWhitelistedPreamble, 0,
                                   "file shorter than a DICOM preamble"});
    }
    report.verdict = verdict_from_evidence(report.evidence);
    return report;
}

} // namespace maldicom::detector
