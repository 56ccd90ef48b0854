#include "conecoord/trace_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace conecoord {

namespace {

constexpr const char* kHeader =
    "k,block,eps,objective,suboptimality,feasibility,dual_residual,"
    "lyapunov,wall_ns";

double parse_double(const std::string& field) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw std::invalid_argument("bad numeric field: " + field);
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw std::runtime_error("to_chars failed");
  return std::string(buffer, ptr);
}

std::string trace_to_csv(const IterationTrace& trace) {
  std::ostringstream out;
  out << kHeader << '\n';
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << rec.block << ',' << format_double(rec.eps) << ','
        << format_double(rec.objective) << ',';
    if (rec.suboptimality) out << format_double(*rec.suboptimality);
    out << ',' << format_double(rec.feasibility) << ','
        << format_double(rec.dual_residual) << ',';
    if (rec.lyapunov) out << format_double(*rec.lyapunov);
    out << ',' << rec.wall_ns << '\n';
  }
  return out.str();
}

IterationTrace trace_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader)
    throw std::invalid_argument("bad trace header");
  IterationTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 9)
      throw std::invalid_argument("bad trace row: " + line);
    TraceRecord rec;
    rec.k = std::stol(fields[0]);
    rec.block = std::stoi(fields[1]);
    rec.eps = parse_double(fields[2]);
    rec.objective = parse_double(fields[3]);
    if (!fields[4].empty()) rec.suboptimality = parse_double(fields[4]);
    rec.feasibility = parse_double(fields[5]);
    rec.dual_residual = parse_double(fields[6]);
    if (!fields[7].empty()) rec.lyapunov = parse_double(fields[7]);
    rec.wall_ns = std::stoll(fields[8]);
    trace.records.push_back(rec);
  }
  return trace;
}

void write_trace(const IterationTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + path + " for writing");
  out << trace_to_csv(trace);
  if (!out) throw std::ios_base::failure("write failed: " + path);
}

IterationTrace read_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return trace_from_csv(buffer.str());
}

}  // namespace conecoord
