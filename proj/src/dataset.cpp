#include "maldicom/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace maldicom::triage {

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double diff = a[i] - b[i];
        d += diff * diff;
    }
    return d;
}

} // namespace

const char* category_name(Category c) {
    switch (c) {
        case Category::Benign: return "Benign";
        case Category::Ransomware: return "Ransomware";
        case Category::Spyware: return "Spyware";
        case Category::Trojan: return "Trojan";
    }
    return "Unknown";
}

Category category_from_token(const std::string& token) {
    std::string t = lower(token);
    if (t == "benign") return Category::Benign;
    if (t == "ransomware") return Category::Ransomware;
    if (t == "spyware") return Category::Spyware;
    if (t == "trojan") return Category::Trojan;
    throw Error(ErrorCode::UnknownCategoryToken, token);
}

std::string Dataset::class_label(const LabeledSample& s, LabelMode mode) {
    if (s.category == Category::Benign) return "Benign";
    if (mode == LabelMode::Category4) return category_name(s.category);
    return std::string(category_name(s.category)) + "-" + s.family;
}

ClassIndex build_class_index(const Dataset& d, LabelMode mode) {
    ClassIndex idx;
    std::map<std::string, int> seen;
    std::vector<std::string> per_sample;
    per_sample.reserve(d.size());
    for (const LabeledSample& s : d.samples) {
        per_sample.push_back(Dataset::class_label(s, mode));
        seen.emplace(per_sample.back(), 0);
    }
    int i = 0;
    for (auto& [label, id] : seen) {
        id = i++;
        idx.labels.push_back(label);
    }
    idx.sample_class.reserve(d.size());
    for (const std::string& l : per_sample) idx.sample_class.push_back(seen[l]);
    return idx;
}

Dataset load_malmem_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open " + path);
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::SchemaMismatch, "empty CSV");
    }
    std::vector<std::string> header = split_csv_line(line);

    int category_col = -1;
    std::vector<int> feature_cols;
    Dataset d;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string h = lower(header[i]);
        if (h == "category") {
            category_col = static_cast<int>(i);
        } else if (h == "class") {
            // redundant binary label in the published CSV, ignored
        } else {
            feature_cols.push_back(static_cast<int>(i));
            d.feature_names.push_back(header[i]);
        }
    }
    if (category_col < 0) {
        throw Error(ErrorCode::SchemaMismatch, "no Category column in header");
    }
    if (feature_cols.empty()) {
        throw Error(ErrorCode::SchemaMismatch, "no feature columns in header");
    }

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw Error(ErrorCode::SchemaMismatch,
                        "line " + std::to_string(lineno) + " has " +
                            std::to_string(cells.size()) + " cells, header has " +
                            std::to_string(header.size()));
        }
        LabeledSample s;
        s.x.reserve(feature_cols.size());
        for (int c : feature_cols) {
            const std::string& cell = cells[static_cast<std::size_t>(c)];
            char* end = nullptr;
            double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw Error(ErrorCode::NonNumericFeature,
                            "line " + std::to_string(lineno) + ", column " + header[c] +
                                ": \"" + cell + "\"");
            }
            s.x.push_back(v);
        }
        // Category cells look like "Trojan-Refroso-27d82f..." or plain "Benign".
        const std::string& cat = cells[static_cast<std::size_t>(category_col)];
        std::size_t dash = cat.find('-');
        s.category = category_from_token(cat.substr(0, dash));
        if (s.category != Category::Benign && dash != std::string::npos) {
            std::size_t dash2 = cat.find('-', dash + 1);
            s.family = cat.substr(dash + 1, dash2 == std::string::npos ? std::string::npos
                                                                       : dash2 - dash - 1);
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

Dataset smote_oversample(const Dataset& d, int k, std::uint64_t seed, LabelMode mode) {
    ClassIndex idx = build_class_index(d, mode);
    std::size_t n_classes = idx.labels.size();

    std::vector<std::vector<std::size_t>> members(n_classes);
    for (std::size_t i = 0; i < d.size(); ++i) {
        members[static_cast<std::size_t>(idx.sample_class[i])].push_back(i);
    }
    std::size_t majority = 0;
    for (const auto& m : members) majority = std::max(majority, m.size());

    Dataset out = d;
    std::mt19937_64 rng(seed);

    for (std::size_t c = 0; c < n_classes; ++c) {
        const auto& m = members[c];
        std::size_t need = majority - m.size();
        if (need == 0) continue;
        if (m.size() < static_cast<std::size_t>(k) + 1) {
            throw Error(ErrorCode::ClassTooSmall,
                        idx.labels[c] + " has " + std::to_string(m.size()) +
                            " samples, need k+1=" + std::to_string(k + 1));
        }

        // k nearest same-class neighbors of every class member, brute force.
        std::vector<std::vector<std::size_t>> neighbors(m.size());
        for (std::size_t a = 0; a < m.size(); ++a) {
            std::vector<std::pair<double, std::size_t>> dist;
            dist.reserve(m.size() - 1);
            for (std::size_t b = 0; b < m.size(); ++b) {
                if (a == b) continue;
                dist.emplace_back(squared_distance(d.samples[m[a]].x, d.samples[m[b]].x), b);
            }
            std::sort(dist.begin(), dist.end());
            for (int j = 0; j < k; ++j) neighbors[a].push_back(dist[static_cast<std::size_t>(j)].second);
        }

        std::uniform_int_distribution<std::size_t> pick_base(0, m.size() - 1);
        std::uniform_int_distribution<std::size_t> pick_nn(0, static_cast<std::size_t>(k) - 1);
        std::uniform_real_distribution<double> pick_u(0.0, 1.0);
        for (std::size_t s = 0; s < need; ++s) {
            std::size_t a = pick_base(rng);
            std::size_t b = neighbors[a][pick_nn(rng)];
            double u = pick_u(rng);
            const LabeledSample& base = d.samples[m[a]];
            const LabeledSample& nn = d.samples[m[b]];
            LabeledSample synth;
            synth.category = base.category;
            synth.family = base.family;
            synth.x.resize(base.x.size());
            for (std::size_t f = 0; f < base.x.size(); ++f) {
                synth.x[f] = base.x[f] + u * (nn.x[f] - base.x[f]);
            }
            out.samples.push_back(std::move(synth));
        }
    }
    return out;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, double train_fraction,
                                             std::uint64_t seed, LabelMode mode) {
    ClassIndex idx = build_class_index(d, mode);
    std::vector<std::vector<std::size_t>> members(idx.labels.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
        members[static_cast<std::size_t>(idx.sample_class[i])].push_back(i);
    }

    Dataset train, test;
    train.feature_names = d.feature_names;
    test.feature_names = d.feature_names;
    std::mt19937_64 rng(seed);
    for (auto& m : members) {
        std::shuffle(m.begin(), m.end(), rng);
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(train_fraction * static_cast<double>(m.size())));
        n_train = std::min(n_train, m.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            (i < n_train ? train : test).samples.push_back(d.samples[m[i]]);
        }
    }
    return {std::move(train), std::move(test)};
}

} // namespace maldicom::triage
