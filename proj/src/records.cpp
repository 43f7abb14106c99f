#include "meddial/records.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "meddial/error.hpp"
#include "meddial/unicode.hpp"
#include "meddial/util.hpp"

namespace meddial {

using nlohmann::json;

std::string prediction_to_jsonl(const Prediction& p) {
    json obj = {{"dialogue_id", p.dialogue_id}, {"turn", p.turn}, {"response", p.response}};
    if (p.entities) obj["entities"] = *p.entities;
    if (!p.actions.empty()) obj["actions"] = p.actions;
    if (!p.raw.empty()) obj["raw"] = p.raw;
    if (!p.parse_mode.empty()) obj["parse_mode"] = p.parse_mode;
    return obj.dump();
}

std::vector<Prediction> parse_predictions(std::string_view jsonl, const std::string& origin) {
    std::vector<Prediction> out;
    std::size_t line_no = 0;
    for (const std::string& raw : split(jsonl, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const std::string where = origin + ":" + std::to_string(line_no);
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw data_error("InvalidJson", where + ": " + e.what());
        }
        if (!obj.contains("dialogue_id") || !obj["dialogue_id"].is_string() ||
            !obj.contains("turn") || !obj["turn"].is_number_integer() ||
            !obj.contains("response") || !obj["response"].is_string()) {
            throw data_error("MalformedPrediction",
                             where + ": need dialogue_id, turn, response");
        }
        Prediction p;
        p.dialogue_id = obj["dialogue_id"].get<std::string>();
        p.turn = obj["turn"].get<int>();
        p.response = obj["response"].get<std::string>();
        if (obj.contains("entities")) {
            if (!obj["entities"].is_array()) {
                throw data_error("MalformedPrediction", where + ": entities must be an array");
            }
            p.entities = obj["entities"].get<std::vector<std::string>>();
        }
        if (obj.contains("actions") && obj["actions"].is_array()) {
            p.actions = obj["actions"].get<std::vector<std::string>>();
        }
        if (obj.contains("raw") && obj["raw"].is_string()) p.raw = obj["raw"].get<std::string>();
        if (obj.contains("parse_mode") && obj["parse_mode"].is_string()) {
            p.parse_mode = obj["parse_mode"].get<std::string>();
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Prediction> load_predictions(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("FileNotReadable", "cannot open predictions file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_predictions(buf.str(), path.string());
}

std::string mined_to_jsonl(const MinedRecord& rec) {
    json direct = json::array();
    for (const Triplet& t : rec.bundle.direct) {
        direct.push_back(json::array({t.head, t.relation, t.tail}));
    }
    json potential = json::array();
    for (const PotentialTriplet& p : rec.bundle.potential) {
        potential.push_back(
            json::array({p.triplet.head, p.triplet.relation, p.triplet.tail, p.via}));
    }
    json nodes = json::array();
    for (const ScoredNode& n : rec.bundle.potential_nodes) {
        nodes.push_back(json::array({n.name, n.score}));
    }
    const json obj = {{"dialogue_id", rec.dialogue_id},
                      {"turn", rec.turn},
                      {"direct", std::move(direct)},
                      {"potential", std::move(potential)},
                      {"nodes", std::move(nodes)}};
    return obj.dump();
}

} // namespace meddial
