#include "trajnorm/corpus_io.hpp"

#include <sstream>

#include "trajnorm/text_io.hpp"

namespace trajnorm {

namespace {

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(line_no, line);
    start = end + 1;
  }
}

}  // namespace

std::vector<BoundingBoxRecord> parse_annotations(std::string_view text, const std::string& source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<BoundingBoxRecord> records;
  bool seen_header = false;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    if (!seen_header) {
      if (trim(line) != kAnnotationHeader) {
        throw ParseError(source, line_no, "expected header '" + std::string(kAnnotationHeader) + "'");
      }
      seen_header = true;
      return;
    }
    auto fields = split(line, ',');
    if (fields.size() != 7) {
      throw ParseError(source, line_no, "expected 7 fields, got " + std::to_string(fields.size()));
    }
    try {
      BoundingBoxRecord r;
      r.frame_index = parse_integer(fields[0]);
      r.object_id = parse_integer(fields[1]);
      const long long label = parse_integer(fields[2]);
      if (!is_valid_label(static_cast<int>(label)) || label != static_cast<int>(label)) {
        throw Error("label must be 0, 1 or 2");
      }
      r.label = static_cast<ClassLabel>(label);
      r.x_min = parse_real(fields[3]);
      r.y_min = parse_real(fields[4]);
      r.x_max = parse_real(fields[5]);
      r.y_max = parse_real(fields[6]);
      if (r.frame_index < 0) throw Error("frame index must be non-negative");
      if (r.x_min > r.x_max || r.y_min > r.y_max) throw Error("box has min greater than max");
      records.push_back(r);
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
  });
  if (!seen_header) throw ParseError(source, 1, "missing header");
  if (records.empty()) throw ParseError(source, 2, "annotation file has no records");
  return records;
}

std::vector<BoundingBoxRecord> read_annotations(const std::filesystem::path& path) {
  return parse_annotations(read_file(path), path.string());
}

std::string format_annotations(const std::vector<BoundingBoxRecord>& records) {
  std::string out(kAnnotationHeader);
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.frame_index);
    out += ',';
    out += std::to_string(r.object_id);
    out += ',';
    out += std::to_string(static_cast<int>(r.label));
    for (double v : {r.x_min, r.y_min, r.x_max, r.y_max}) {
      out += ',';
      out += format_shortest(v);
    }
    out += '\n';
  }
  return out;
}

std::string corpus_header() {
  std::string h = "label";
  for (int i = 1; i <= kWindowLength; ++i) {
    const auto n = std::to_string(i);
    h += ",x" + n + ",y" + n + ",vx" + n + ",vy" + n;
  }
  return h;
}

std::string format_corpus(const Corpus& samples, const std::vector<std::string>& provenance) {
  if (samples.cols() != kPackedWidth && samples.rows() > 0) {
    throw Error("corpus must have 125 columns, got " + std::to_string(samples.cols()));
  }
  const bool with_source = !provenance.empty();
  if (with_source && provenance.size() != static_cast<std::size_t>(samples.rows())) {
    throw Error("provenance length does not match sample count");
  }
  std::string out = corpus_header();
  if (with_source) out += ",source";
  out += '\n';
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_shortest(samples(r, c));
    }
    if (with_source) {
      out += ',';
      out += provenance[static_cast<std::size_t>(r)];
    }
    out += '\n';
  }
  return out;
}

CorpusFile parse_corpus(std::string_view text, const std::string& source) {
  const std::string header = corpus_header();
  const std::string header_with_source = header + ",source";
  bool seen_header = false;
  bool with_source = false;
  std::vector<double> values;
  CorpusFile file;
  std::size_t rows = 0;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (trim(line).empty()) return;
    if (!seen_header) {
      if (trim(line) == header) {
        with_source = false;
      } else if (trim(line) == header_with_source) {
        with_source = true;
      } else {
        throw ParseError(source, line_no, "unexpected corpus header");
      }
      seen_header = true;
      return;
    }
    auto fields = split(line, ',');
    const std::size_t expected = kPackedWidth + (with_source ? 1 : 0);
    if (fields.size() != expected) {
      throw ParseError(source, line_no,
                       "expected " + std::to_string(expected) + " fields, got " + std::to_string(fields.size()));
    }
    try {
      for (int c = 0; c < kPackedWidth; ++c) values.push_back(parse_real(fields[static_cast<std::size_t>(c)]));
    } catch (const Error& e) {
      throw ParseError(source, line_no, e.what());
    }
    if (with_source) file.provenance.emplace_back(trim(fields.back()));
    ++rows;
  });
  if (!seen_header) throw ParseError(source, 1, "missing corpus header");
  file.samples = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), static_cast<Eigen::Index>(rows), kPackedWidth);
  return file;
}

void write_corpus(const std::filesystem::path& path, const Corpus& samples,
                  const std::vector<std::string>& provenance) {
  write_file_atomic(path, format_corpus(samples, provenance));
}

CorpusFile read_corpus(const std::filesystem::path& path) {
  return parse_corpus(read_file(path), path.string());
}

}  // namespace trajnorm
