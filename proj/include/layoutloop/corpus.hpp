// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <layoutloop/layout_doc.hpp>
#include <layoutloop/raster.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace layoutloop
{

/// A layout prompt: document, target text and background raster.
struct CorpusDocument
{
    std::string id;
    LayoutDocument doc;
    std::string target_text;
    LuminanceRaster background;
    std::string background_path; // file the background was loaded from or will be written to
};

/// Synthetic posters. Each background has a smooth light panel, a dark textured strip on the right
/// and a dark band at the bottom; the text column sits in the panel, left-aligned, with its longest
/// line and its last baseline close to the panel edges.
[[nodiscard]] std::vector<CorpusDocument> synth_corpus(int count, std::uint64_t seed);

/// Flawed drafts on plain light backgrounds: one text runs past the right edge and one overlaps
/// another text.
[[nodiscard]] std::vector<CorpusDocument> crafted_fixer_corpus(int count, std::uint64_t seed);

/// Writes <id>.svg, <id>.txt and <id>.pgm per document; background_path is updated to the PGM path.
void write_corpus(std::vector<CorpusDocument>& docs, const std::filesystem::path& dir);

/// Reads every <id>.svg in `dir` with its <id>.txt and <id>.png or <id>.pgm, sorted by id.
/// A missing background falls back to a white canvas (recorded as an empty background_path).
[[nodiscard]] std::vector<CorpusDocument> load_corpus(const std::filesystem::path& dir);

/// Loads a single document from its SVG path using the same sibling-file conventions.
[[nodiscard]] CorpusDocument load_document(const std::filesystem::path& svg_path);

[[nodiscard]] std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

} // namespace layoutloop
