#pragma once

#include <filesystem>
#include <string>

#include "fastpaint/types.hpp"

namespace fastpaint {

constexpr int kSequenceFormatVersion = 1;

// JSON document: {"version": 1, "stroke_type": "oil"|"bezier",
//                 "canvas": {"h": H, "w": W}, "strokes": [[...], ...]}
std::string sequence_to_json(const StrokeSequence& seq);
StrokeSequence sequence_from_json(const std::string& text);

void save_sequence(const StrokeSequence& seq, const std::filesystem::path& path);
StrokeSequence load_sequence(const std::filesystem::path& path);

}  // namespace fastpaint
