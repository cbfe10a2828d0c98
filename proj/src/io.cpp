#include "cvinfer/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "cvinfer/error.hpp"

namespace cvinfer {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\r')) cell.pop_back();
    std::size_t start = 0;
    while (start < cell.size() && cell[start] == ' ') ++start;
    cells.push_back(cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

double parse_number(const std::string& cell, std::size_t line) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || cell.empty()) {
    throw Error(ErrorCode::invalid_input,
                "line " + std::to_string(line) + ": not a number: \"" + cell + "\"");
  }
  return value;
}

std::size_t parse_index(const std::string& cell, std::size_t line) {
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    throw Error(ErrorCode::invalid_input,
                "line " + std::to_string(line) + ": not a non-negative integer: \"" + cell + "\"");
  }
  return value;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed: " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  const auto text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::invalid_input, path.string() + ": " + e.what());
  }
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Dataset parse_dataset_csv(const std::string& text, TargetKind kind) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::invalid_input, "dataset CSV is empty");
  const auto header = split_line(lines[0]);
  if (header.empty() || header.back() != "y") {
    throw Error(ErrorCode::invalid_input, "dataset CSV header must end with column y");
  }
  const std::size_t p = header.size() - 1;
  for (std::size_t c = 0; c < p; ++c) {
    if (header[c] != "x" + std::to_string(c + 1)) {
      throw Error(ErrorCode::invalid_input, "dataset CSV column " + std::to_string(c + 1) +
                                                " must be named x" + std::to_string(c + 1));
    }
  }
  Dataset data(p, kind);
  std::vector<double> row(p);
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_line(lines[l]);
    if (cells.size() != p + 1) {
      throw Error(ErrorCode::invalid_input, "line " + std::to_string(l + 1) + ": expected " +
                                                std::to_string(p + 1) + " columns");
    }
    for (std::size_t c = 0; c < p; ++c) row[c] = parse_number(cells[c], l + 1);
    data.push_back(row, parse_number(cells[p], l + 1));
  }
  return data;
}

std::string format_dataset_csv(const Dataset& data) {
  std::string out;
  for (std::size_t c = 0; c < data.dim(); ++c) out += "x" + std::to_string(c + 1) + ",";
  out += "y\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double x : data.features(i)) out += format_double(x) + ",";
    out += format_double(data.target(i)) + "\n";
  }
  return out;
}

Dataset read_dataset_csv(const std::filesystem::path& path, TargetKind kind) {
  return parse_dataset_csv(read_text_file(path), kind);
}

LossMatrix parse_loss_matrix_csv(const std::string& text, LossKind kind) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw Error(ErrorCode::malformed_loss_matrix, "loss matrix CSV is empty");
  const auto header = split_line(lines[0]);
  if (header != std::vector<std::string>{"index", "fold", "loss"}) {
    throw Error(ErrorCode::malformed_loss_matrix, "loss matrix header must be index,fold,loss");
  }
  std::vector<LossEntry> entries;
  std::size_t k = 0;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    const auto cells = split_line(lines[l]);
    if (cells.size() != 3) {
      throw Error(ErrorCode::malformed_loss_matrix,
                  "line " + std::to_string(l + 1) + ": expected 3 columns");
    }
    try {
      LossEntry e{parse_index(cells[0], l + 1), parse_index(cells[1], l + 1),
                  parse_number(cells[2], l + 1)};
      k = std::max(k, e.fold + 1);
      entries.push_back(e);
    } catch (const Error& e) {
      throw Error(ErrorCode::malformed_loss_matrix, e.what());
    }
  }
  const std::size_t n = entries.size();
  return LossMatrix(std::move(entries), n, k, kind);
}

std::string format_loss_matrix_csv(const LossMatrix& m) {
  std::string out = "index,fold,loss\n";
  for (const auto& e : m.entries()) {
    out += std::to_string(e.index) + "," + std::to_string(e.fold) + "," + format_double(e.loss) +
           "\n";
  }
  return out;
}

LossMatrix read_loss_matrix_csv(const std::filesystem::path& path, LossKind kind) {
  return parse_loss_matrix_csv(read_text_file(path), kind);
}

}  // namespace cvinfer
