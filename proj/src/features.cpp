#include "nephra/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nephra/digest.hpp"

namespace nephra::features {

namespace {

std::string count_key(const std::string& code_key, int threshold) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", threshold);
    return "cnt|" + code_key + "|>" + buf;
}

std::string age_key(int decade_start) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%03d", decade_start);
    return std::string("age|") + buf;
}

std::string lab_key(const std::string& code, int bin) {
    return "lab|" + code + "|z" + std::to_string(bin);
}

// Candidate features a patient activates, before min-support filtering. Used
// identically by fit (support counting) and encode, so every indexed feature
// is reachable.
void active_candidates(const AggregateRecord& agg,
                       const std::map<std::string, LabStats>& lab_stats,
                       const FeatureConfig& config,
                       std::vector<std::string>& out) {
    out.clear();
    const int decade = static_cast<int>(std::floor(agg.age_years / config.age_bin_width)) * config.age_bin_width;
    out.push_back(age_key(decade));
    for (const auto& [code_key, count] : agg.counts)
        for (int t : config.count_thresholds)
            if (count > t) out.push_back(count_key(code_key, t));
    for (const auto& [code, vm] : agg.lab_max) {
        const auto it = lab_stats.find(code);
        if (it == lab_stats.end()) continue;
        const double z = it->second.stddev > 0.0 ? (vm.first - it->second.mean) / it->second.stddev : 0.0;
        out.push_back(lab_key(code, z_bin(z, config.lab_z_edges)));
    }
    if (config.include_demographics) {
        out.push_back("sex|" + cohort::to_string(agg.sex));
        out.push_back("race|" + cohort::to_string(agg.race));
    }
}

}  // namespace

AggregateRecord aggregate(const cohort::LabeledPatient& lp, const cohort::CohortSpec& spec) {
    if (lp.status == cohort::Status::ExcludedPrevalent)
        throw std::invalid_argument("aggregate: excluded patient " + lp.patient.id);
    AggregateRecord agg;
    agg.patient_id = lp.patient.id;
    agg.age_years = lp.age_years;
    agg.sex = lp.patient.sex;
    agg.race = lp.patient.race;
    for (const auto& o : lp.patient.observations) {
        if (o.date < spec.obs_start || o.date >= spec.obs_end) continue;
        switch (o.system) {
            case codes::CodeSystem::ICD10:
            case codes::CodeSystem::CPT:
                agg.counts[codes::to_string(o.system) + ":" + o.code] += 1;
                break;
            case codes::CodeSystem::LOINC: {
                if (!o.value) break;
                auto [it, inserted] = agg.lab_max.emplace(o.code, std::make_pair(*o.value, o.unit.value_or("")));
                if (!inserted && *o.value > it->second.first)
                    it->second = {*o.value, o.unit.value_or("")};
                break;
            }
        }
    }
    return agg;
}

int z_bin(double z, const std::vector<double>& edges) {
    int bin = 0;
    for (double e : edges) {
        if (e <= 0.0 ? z > e : z >= e) ++bin;
    }
    return bin;
}

FeatureSpace fit_feature_space(const std::vector<AggregateRecord>& train, const FeatureConfig& config) {
    if (train.empty()) throw std::invalid_argument("fit_feature_space: empty training set");
    FeatureSpace space;
    space.config = config;

    // lab stats over patients that observed each lab
    std::map<std::string, std::pair<double, int>> sums;  // code -> (sum, n)
    for (const auto& agg : train)
        for (const auto& [code, vm] : agg.lab_max) {
            auto& s = sums[code];
            s.first += vm.first;
            s.second += 1;
        }
    for (const auto& [code, s] : sums) {
        const double mean = s.first / s.second;
        double ss = 0.0;
        for (const auto& agg : train) {
            const auto it = agg.lab_max.find(code);
            if (it != agg.lab_max.end()) ss += (it->second.first - mean) * (it->second.first - mean);
        }
        space.lab_stats[code] = {mean, std::sqrt(ss / s.second)};
    }

    std::map<std::string, int> support;
    std::vector<std::string> keys;
    for (const auto& agg : train) {
        active_candidates(agg, space.lab_stats, config, keys);
        for (const auto& k : keys) support[k] += 1;
    }
    int col = 0;
    for (const auto& [key, n] : support)  // std::map iterates lexicographically
        if (n >= config.min_support) space.feature_index.emplace(key, col++);
    space.dims = col;
    if (space.dims == 0) throw std::runtime_error("empty feature space");
    space.version = hex64(fnv1a64(serialize_feature_space(space)));
    return space;
}

SparseVector encode(const AggregateRecord& agg, const FeatureSpace& space) {
    std::vector<std::string> keys;
    active_candidates(agg, space.lab_stats, space.config, keys);
    SparseVector v;
    v.dims = space.dims;
    for (const auto& k : keys) {
        const auto it = space.feature_index.find(k);
        if (it != space.feature_index.end()) v.active.push_back(it->second);
    }
    std::sort(v.active.begin(), v.active.end());
    v.active.erase(std::unique(v.active.begin(), v.active.end()), v.active.end());
    return v;
}

std::string serialize_feature_space(const FeatureSpace& space) {
    std::ostringstream out;
    out << "nephra-feature-space v1\n";
    char num[32];
    out << "config min_support=" << space.config.min_support
        << " age_bin_width=" << space.config.age_bin_width
        << " include_demographics=" << (space.config.include_demographics ? 1 : 0)
        << " count_thresholds=";
    for (size_t i = 0; i < space.config.count_thresholds.size(); ++i)
        out << (i ? "," : "") << space.config.count_thresholds[i];
    out << " lab_z_edges=";
    for (size_t i = 0; i < space.config.lab_z_edges.size(); ++i) {
        std::snprintf(num, sizeof(num), "%.17g", space.config.lab_z_edges[i]);
        out << (i ? "," : "") << num;
    }
    out << "\n";
    for (const auto& [code, st] : space.lab_stats) {
        char m[32], s[32];
        std::snprintf(m, sizeof(m), "%.17g", st.mean);
        std::snprintf(s, sizeof(s), "%.17g", st.stddev);
        out << "labstat " << code << " " << m << " " << s << "\n";
    }
    for (const auto& [key, idx] : space.feature_index)
        out << "feature " << key << " " << idx << "\n";
    return out.str();
}

FeatureSpace parse_feature_space(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "nephra-feature-space v1")
        throw std::runtime_error("not a nephra feature-space artifact (bad header)");
    FeatureSpace space;
    auto parse_list_i = [](const std::string& s) {
        std::vector<int> v;
        std::istringstream ls(s);
        std::string tok;
        while (std::getline(ls, tok, ',')) v.push_back(std::stoi(tok));
        return v;
    };
    auto parse_list_d = [](const std::string& s) {
        std::vector<double> v;
        std::istringstream ls(s);
        std::string tok;
        while (std::getline(ls, tok, ',')) v.push_back(std::stod(tok));
        return v;
    };
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "config") {
            std::string kv;
            while (ls >> kv) {
                const size_t eq = kv.find('=');
                if (eq == std::string::npos) throw std::runtime_error("bad config entry: " + kv);
                const std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
                if (k == "min_support") space.config.min_support = std::stoi(v);
                else if (k == "age_bin_width") space.config.age_bin_width = std::stoi(v);
                else if (k == "include_demographics") space.config.include_demographics = v == "1";
                else if (k == "count_thresholds") space.config.count_thresholds = parse_list_i(v);
                else if (k == "lab_z_edges") space.config.lab_z_edges = parse_list_d(v);
                else throw std::runtime_error("unknown config key: " + k);
            }
        } else if (kind == "labstat") {
            std::string code;
            LabStats st;
            if (!(ls >> code >> st.mean >> st.stddev)) throw std::runtime_error("bad labstat line: " + line);
            space.lab_stats[code] = st;
        } else if (kind == "feature") {
            std::string key;
            int idx;
            if (!(ls >> key >> idx)) throw std::runtime_error("bad feature line: " + line);
            space.feature_index[key] = idx;
        } else {
            throw std::runtime_error("unknown feature-space line: " + line);
        }
    }
    space.dims = static_cast<int>(space.feature_index.size());
    space.version = hex64(fnv1a64(serialize_feature_space(space)));
    return space;
}

void save_feature_space(const FeatureSpace& space, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write feature space: " + path);
    out << serialize_feature_space(space);
}

FeatureSpace load_feature_space(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open feature space: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_feature_space(ss.str());
}

}  // namespace nephra::features
