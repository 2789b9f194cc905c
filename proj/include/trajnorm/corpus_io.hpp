#pragma once

// Annotation and corpus files (comma-separated text with a fixed header).

#include <filesystem>
#include <string>
#include <vector>

#include "trajnorm/common.hpp"
#include "trajnorm/pipeline.hpp"

namespace trajnorm {

inline constexpr std::string_view kAnnotationHeader = "frame,object_id,label,x_min,y_min,x_max,y_max";

std::vector<BoundingBoxRecord> parse_annotations(std::string_view text,
                                                 const std::string& source = "<annotations>");
std::vector<BoundingBoxRecord> read_annotations(const std::filesystem::path& path);
std::string format_annotations(const std::vector<BoundingBoxRecord>& records);

/// `label,x1,y1,vx1,vy1,...,x31,y31,vx31,vy31`
std::string corpus_header();

struct CorpusFile {
  Corpus samples;
  /// Present only when the file carries a trailing `source` column.
  std::vector<std::string> provenance;
};

std::string format_corpus(const Corpus& samples, const std::vector<std::string>& provenance = {});
CorpusFile parse_corpus(std::string_view text, const std::string& source = "<corpus>");

void write_corpus(const std::filesystem::path& path, const Corpus& samples,
                  const std::vector<std::string>& provenance = {});
CorpusFile read_corpus(const std::filesystem::path& path);

}  // namespace trajnorm
