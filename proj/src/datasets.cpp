#include "granuscore/datasets.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"
#include "granuscore/text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_set>

namespace granuscore {

using nlohmann::json;

std::vector<double> normalize_levels(size_t n) {
    if (n < 1 || n > 4) {
        throw DataError("normalize_levels: resolution " + std::to_string(n) +
                        " outside [1, 4]");
    }
    if (n == 1) return {1.0};
    std::vector<double> levels(n);
    for (size_t i = 0; i < n; ++i) {
        levels[i] = 1.0 + 3.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return levels;
}

std::vector<GranolaEntry> load_granola(const std::string& path, IngestReport* report) {
    std::ifstream f(path);
    if (!f) throw ResolutionError("cannot open dataset: " + path);
    IngestReport local;
    std::vector<GranolaEntry> entries;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        ++local.lines;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object() || !row.contains("question") ||
            !row.contains("answers") || !row["answers"].is_array()) {
            ++local.malformed;
            local.warnings.push_back("line " + std::to_string(lineno) + ": malformed record");
            continue;
        }
        std::vector<std::string> answers;
        bool bad = false;
        for (const auto& a : row["answers"]) {
            if (!a.is_string() || trim(a.get<std::string>()).empty()) {
                bad = true;
                break;
            }
            answers.push_back(trim(a.get<std::string>()));
        }
        if (bad || answers.empty()) {
            ++local.malformed;
            local.warnings.push_back("line " + std::to_string(lineno) + ": bad answer list");
            continue;
        }
        if (answers.size() > 4) {
            ++local.dropped_over_resolution;
            continue;
        }
        GranolaEntry e;
        e.id = row.value("id", "entry-" + std::to_string(lineno));
        e.question = trim(row.at("question").get<std::string>());
        e.relation_id = row.value("relation", "");
        std::vector<double> levels = normalize_levels(answers.size());
        for (size_t i = 0; i < answers.size(); ++i) {
            e.realizations.emplace_back(std::move(answers[i]), levels[i]);
        }
        entries.push_back(std::move(e));
        ++local.loaded;
    }
    if (local.lines == 0) {
        local.warnings.push_back("dataset is empty: " + path);
    } else if (static_cast<double>(local.malformed) > 0.05 * static_cast<double>(local.lines)) {
        throw DataError("more than 5% malformed records in " + path + " (" +
                        std::to_string(local.malformed) + " of " + std::to_string(local.lines) +
                        ")");
    }
    if (report) *report = local;
    return entries;
}

std::string split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::dev: return "dev";
        case Split::test: return "test";
    }
    return "unknown";
}

std::array<size_t, 3> SplitAssignment::counts() const {
    std::array<size_t, 3> c{0, 0, 0};
    for (Split s : by_entry) c[static_cast<size_t>(s)] += 1;
    return c;
}

namespace {

struct UnionFind {
    std::vector<size_t> parent;
    explicit UnionFind(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    size_t find(size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(size_t a, size_t b) { parent[find(a)] = find(b); }
};

} // namespace

SplitAssignment split_by_realization(const std::vector<GranolaEntry>& entries,
                                     const std::array<double, 3>& ratios, uint64_t seed,
                                     std::vector<std::string>* warnings) {
    double total_ratio = ratios[0] + ratios[1] + ratios[2];
    if (!(ratios[0] > 0.0 && ratios[1] > 0.0 && ratios[2] > 0.0) ||
        std::abs(total_ratio - 1.0) > 1e-9) {
        throw ConfigError("split ratios must be positive and sum to 1");
    }
    const size_t n = entries.size();
    UnionFind uf(n);
    std::unordered_map<std::string, size_t> first_seen;
    for (size_t i = 0; i < n; ++i) {
        for (const auto& [text, level] : entries[i].realizations) {
            std::string key = normalize_key(text);
            auto [it, inserted] = first_seen.emplace(key, i);
            if (!inserted) uf.unite(i, it->second);
        }
    }

    std::unordered_map<size_t, std::vector<size_t>> components;
    for (size_t i = 0; i < n; ++i) components[uf.find(i)].push_back(i);

    std::vector<std::vector<size_t>> comps;
    comps.reserve(components.size());
    for (auto& [root, members] : components) comps.push_back(std::move(members));
    // largest first; equal sizes ordered by a seeded hash of the root entry id
    // so different seeds explore different assignments
    auto tiebreak = [&](const std::vector<size_t>& c) {
        return fnv1a64(entries[c.front()].id, seed ^ 0x73706c6974ULL);
    };
    std::sort(comps.begin(), comps.end(),
              [&](const std::vector<size_t>& a, const std::vector<size_t>& b) {
                  if (a.size() != b.size()) return a.size() > b.size();
                  return tiebreak(a) < tiebreak(b);
              });

    std::array<double, 3> target{ratios[0] * static_cast<double>(n),
                                 ratios[1] * static_cast<double>(n),
                                 ratios[2] * static_cast<double>(n)};
    std::array<size_t, 3> current{0, 0, 0};
    size_t largest_target = static_cast<size_t>(
        *std::max_element(target.begin(), target.end()) + 0.5);

    SplitAssignment out;
    out.seed = seed;
    out.by_entry.assign(n, Split::train);
    for (const auto& comp : comps) {
        size_t pick = 0;
        double best_deficit = -1e300;
        for (size_t s = 0; s < 3; ++s) {
            double deficit = target[s] - static_cast<double>(current[s]);
            if (deficit > best_deficit + 1e-12) {
                best_deficit = deficit;
                pick = s;
            }
        }
        if (comp.size() > largest_target && warnings != nullptr) {
            warnings->push_back("component of " + std::to_string(comp.size()) +
                                " entries exceeds the largest split target (" +
                                std::to_string(largest_target) + "); assigning to train");
        }
        if (comp.size() > largest_target) pick = 0;
        for (size_t i : comp) out.by_entry[i] = static_cast<Split>(pick);
        current[pick] += comp.size();
    }
    for (size_t i = 0; i < n; ++i) {
        for (const auto& [text, level] : entries[i].realizations) {
            out.realization_owner[normalize_key(text)] = out.by_entry[i];
        }
    }
    return out;
}

void save_split_table(const std::vector<GranolaEntry>& entries, const SplitAssignment& assignment,
                      const std::string& path) {
    if (entries.size() != assignment.by_entry.size()) {
        throw DataError("split table: entry/assignment size mismatch");
    }
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open split table for writing: " + path);
    f << "# granuscore split seed=" << assignment.seed << "\n";
    f << "id,split\n";
    for (size_t i = 0; i < entries.size(); ++i) {
        f << entries[i].id << "," << split_name(assignment.by_entry[i]) << "\n";
    }
}

std::unordered_map<std::string, Split> load_split_table(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ResolutionError("cannot open split table: " + path);
    std::unordered_map<std::string, Split> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t == "id,split") continue;
        auto cells = split(t, ',');
        if (cells.size() != 2) {
            throw DataError("split table line " + std::to_string(lineno) + ": expected id,split");
        }
        Split s;
        if (cells[1] == "train") {
            s = Split::train;
        } else if (cells[1] == "dev") {
            s = Split::dev;
        } else if (cells[1] == "test") {
            s = Split::test;
        } else {
            throw DataError("split table line " + std::to_string(lineno) + ": unknown split \"" +
                            cells[1] + "\"");
        }
        out[cells[0]] = s;
    }
    return out;
}

std::vector<std::string> load_calibration_corpus(const std::string& path) {
    std::ifstream f(path);
    if (!f) {
        throw ResolutionError(
            "cannot open calibration corpus: " + path +
            " (provide a noun lemma list, one per line; for WordNet use the first column of "
            "index.noun, e.g. `awk '{print $1}' index.noun`)");
    }
    std::vector<std::string> corpus;
    std::unordered_set<std::string> seen;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        // corpus headers (WordNet license block) start with whitespace
        if (line[0] == ' ' || line[0] == '\t' || line[0] == '#') continue;
        std::string lemma = trim(line);
        if (lemma.empty()) continue;
        std::replace(lemma.begin(), lemma.end(), '_', ' ');
        if (seen.insert(lemma).second) corpus.push_back(std::move(lemma));
    }
    return corpus;
}

std::string qa_outcome_name(QaOutcome o) {
    switch (o) {
        case QaOutcome::correct: return "correct";
        case QaOutcome::wrong: return "wrong";
        case QaOutcome::not_attempted: return "not_attempted";
    }
    return "unknown";
}

QaOutcome qa_outcome_from_name(const std::string& name) {
    if (name == "correct") return QaOutcome::correct;
    if (name == "wrong") return QaOutcome::wrong;
    if (name == "not_attempted") return QaOutcome::not_attempted;
    throw DataError("unknown outcome \"" + name +
                    "\" (allowed: correct, wrong, not_attempted)");
}

std::vector<QARecord> load_qa_records(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ResolutionError("cannot open QA records: " + path);
    std::vector<QARecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.is_object()) {
            throw DataError("QA records line " + std::to_string(lineno) + ": not a JSON object");
        }
        for (const char* field : {"dataset_id", "question", "gold_answer", "model_id",
                                  "model_answer", "outcome"}) {
            if (!row.contains(field)) {
                throw DataError("QA records line " + std::to_string(lineno) +
                                ": missing field \"" + field + "\"");
            }
        }
        QARecord r;
        r.dataset_id = row["dataset_id"].get<std::string>();
        r.question = row["question"].get<std::string>();
        r.gold_answer = row["gold_answer"].get<std::string>();
        r.model_id = row["model_id"].get<std::string>();
        r.model_answer = row["model_answer"].get<std::string>();
        try {
            r.outcome = qa_outcome_from_name(row["outcome"].get<std::string>());
        } catch (const DataError& e) {
            throw DataError("QA records line " + std::to_string(lineno) + ": " + e.what());
        }
        if (trim(r.question).empty() || trim(r.gold_answer).empty() ||
            trim(r.dataset_id).empty() || trim(r.model_id).empty()) {
            throw DataError("QA records line " + std::to_string(lineno) + ": empty required field");
        }
        if (trim(r.model_answer).empty() && r.outcome != QaOutcome::not_attempted) {
            throw DataError("QA records line " + std::to_string(lineno) +
                            ": empty model_answer on a " + qa_outcome_name(r.outcome) + " record");
        }
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace granuscore
