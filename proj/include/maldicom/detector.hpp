#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "maldicom/dicom.hpp"

namespace maldicom::detector {

enum class EvidenceKind {
    MzMagicInPreamble,
    ELfanewTargetsPeSig,
    PeSigInPrivateTag,
    HighPreambleEntropy,
    NonZeroNonWhitelistedPreamble,
};

const char* evidence_kind_name(EvidenceKind k);

struct Evidence {
    EvidenceKind kind;
    std::uint64_t offset = 0;
    std::string detail;
};

enum class Verdict { Clean, Suspicious, Polyglot };

const char* verdict_name(Verdict v);

struct ScanReport {
    std::string path;
    Verdict verdict = Verdict::Clean;
    double entropy_bits = 0.0;
    std::vector<Evidence> evidence;
    std::uint64_t bytes_read = 0;

    std::string to_json() const;
};

struct DetectorConfig {
    double entropy_threshold = 3.0; // bits/byte over the 128-byte preamble
    bool deep_scan = true;          // carve private tag values; off = preamble fast path
};

// H = -sum p_b * log2(p_b), bits per byte, in [0, 8]. Throws Error{EmptyWindow}.
double shannon_entropy(std::span<const std::uint8_t> window);

// Preamble checks against the raw file bytes: MZ magic, e_lfanew landing on
// "PE\0\0", entropy over threshold, and non-whitelisted content. Legitimate
// preambles (all zero, TIFF dual-format headers) produce nothing.
std::vector<Evidence> scan_preamble(std::span<const std::uint8_t> file_bytes,
                                    double entropy_threshold = 3.0);

// Carves every private element value for "PE\0\0" and MZ-at-start signatures.
std::vector<Evidence> scan_private_tags(const dicom::DicomFile& f);

// Verdict rule: Polyglot needs both MZ-in-preamble and e_lfanew hit;
// any other evidence is Suspicious; unparseable files are Suspicious too.
ScanReport classify_file(std::span<const std::uint8_t> bytes, const DetectorConfig& cfg);

// File-backed scan. With deep_scan off this is the constant-read fast path:
// bytes_read stays <= 4096 regardless of file size.
ScanReport scan_path(const std::string& path, const DetectorConfig& cfg);

inline constexpr std::uint64_t kFastPathByteBudget = 4096;

} // namespace maldicom::detector
