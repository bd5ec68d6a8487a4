#include <bit>
#include <cstdint>
#include <cstring>
#include <string>

#include "negres/error.hpp"
#include "negres/io.hpp"
#include "negres/signal.hpp"

namespace negres::signal {

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary trace IO assumes a little-endian host");

RawTrace read_csv_trace(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  RawTrace t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != "patient_id,sample_rate") {
        throw ParseError("expected header 'patient_id,sample_rate'", line_no);
      }
      continue;
    }
    if (line_no == 2) {
      const auto fields = io::split(line, ',');
      if (fields.size() != 2) throw ParseError("expected 'patient_id,sample_rate'", line_no);
      t.patient_id = std::string(fields[0]);
      try {
        t.sample_rate = io::parse_double(fields[1]);
      } catch (const std::exception&) {
        throw ParseError("bad sample rate '" + std::string(fields[1]) + "'", line_no);
      }
      if (!(t.sample_rate > 0.0)) throw ParseError("sample rate must be positive", line_no);
      continue;
    }
    if (line.empty()) continue;
    try {
      t.samples.push_back(io::parse_double(line));
    } catch (const std::exception&) {
      throw ParseError("bad sample '" + std::string(line) + "'", line_no);
    }
  }
  if (line_no < 2) throw ParseError("truncated trace header", line_no);
  return t;
}

RawTrace read_binary_trace(const std::filesystem::path& path) {
  const std::string bytes = io::read_file(path);
  if (bytes.size() < 8) throw ParseError("binary trace shorter than its count field");
  std::uint64_t n = 0;
  std::memcpy(&n, bytes.data(), 8);
  if (n > (bytes.size() - 8) / 8 || bytes.size() != 8 + n * 8) {
    throw ParseError("binary trace length does not match its count (" + std::to_string(n) +
                     ")");
  }
  RawTrace t;
  t.samples.resize(n);
  std::memcpy(t.samples.data(), bytes.data() + 8, n * 8);
  t.patient_id = path.stem().string();
  return t;
}

}  // namespace

RawTrace read_trace(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_csv_trace(path) : read_binary_trace(path);
}

void write_trace_csv(const RawTrace& trace, const std::filesystem::path& path) {
  if (trace.patient_id.find_first_of(",\n") != std::string::npos) {
    throw DataError("patient id may not contain commas or newlines");
  }
  std::string out = "patient_id,sample_rate\n" + trace.patient_id + "," +
                    io::format_double(trace.sample_rate) + "\n";
  for (double v : trace.samples) {
    out += io::format_double(v);
    out += '\n';
  }
  io::write_file_atomic(path, out);
}

void write_trace_binary(const RawTrace& trace, const std::filesystem::path& path) {
  const std::uint64_t n = trace.samples.size();
  std::string out(8 + n * 8, '\0');
  std::memcpy(out.data(), &n, 8);
  std::memcpy(out.data() + 8, trace.samples.data(), n * 8);
  io::write_file_atomic(path, out);
}

}  // namespace negres::signal
