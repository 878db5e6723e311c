#include "fastpaint/sequence_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fastpaint/error.hpp"

namespace fastpaint {

using nlohmann::json;

std::string sequence_to_json(const StrokeSequence& seq) {
    if (auto v = validate(seq)) throw ConfigError("cannot save invalid sequence: " + v->message);

    json strokes = json::array();
    for (const auto& s : seq.strokes) strokes.push_back(s.values);
    const json doc = {
        {"version", kSequenceFormatVersion},
        {"stroke_type", std::string(to_string(seq.kind))},
        {"canvas", {{"h", seq.canvas_h}, {"w", seq.canvas_w}}},
        {"strokes", std::move(strokes)},
    };
    // nlohmann serializes doubles with round-trip precision.
    return doc.dump() + "\n";
}

StrokeSequence sequence_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("stroke file is not valid JSON: ") + e.what());
    }

    try {
        const int version = doc.at("version").get<int>();
        if (version != kSequenceFormatVersion) {
            throw FormatError("unsupported stroke file version " + std::to_string(version) + " (expected " +
                              std::to_string(kSequenceFormatVersion) + ")");
        }
        const auto type_name = doc.at("stroke_type").get<std::string>();
        const auto kind = parse_stroke_kind(type_name);
        if (!kind) throw FormatError("unknown stroke_type '" + type_name + "'");

        StrokeSequence seq;
        seq.kind = *kind;
        seq.canvas_h = doc.at("canvas").at("h").get<int>();
        seq.canvas_w = doc.at("canvas").at("w").get<int>();
        for (const auto& row : doc.at("strokes")) {
            auto values = row.get<std::vector<double>>();
            if (values.size() != arity(seq.kind)) {
                throw FormatError("stroke " + std::to_string(seq.strokes.size()) + " has " +
                                  std::to_string(values.size()) + " components, expected " +
                                  std::to_string(arity(seq.kind)));
            }
            seq.strokes.emplace_back(seq.kind, std::move(values));
        }
        if (auto v = validate(seq)) throw FormatError("invalid stroke file: " + v->message);
        return seq;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed stroke file: ") + e.what());
    }
}

void save_sequence(const StrokeSequence& seq, const std::filesystem::path& path) {
    const std::string text = sequence_to_json(seq);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

StrokeSequence load_sequence(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sequence_from_json(buf.str());
}

}  // namespace fastpaint
