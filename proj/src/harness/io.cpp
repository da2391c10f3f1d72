#include <cstdio>
#include <fstream>
#include <sstream>

#include "geomc/errors.hpp"
#include "geomc/harness.hpp"

namespace geomc {

namespace {

const std::vector<std::string> kTraceColumns{"step", "branch", "accept_prob", "accepted", "sq_jump"};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

double parse_double(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw SchemaError(where + ": '" + cell + "' is not a number");
  }
  if (used != cell.size()) throw SchemaError(where + ": '" + cell + "' is not a number");
  return v;
}

long long parse_integer(const std::string& cell, const std::string& where) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(cell, &used);
  } catch (const std::exception&) {
    throw SchemaError(where + ": '" + cell + "' is not an integer");
  }
  if (used != cell.size()) throw SchemaError(where + ": '" + cell + "' is not an integer");
  return v;
}

/// Number of q columns if `cols` is exactly q0..q{m-1} starting at `offset`.
int check_q_columns(const std::vector<std::string>& cols, std::size_t offset, const std::string& where) {
  const int m = static_cast<int>(cols.size() - offset);
  if (m < 1) throw SchemaError(where + ": no q columns");
  for (int i = 0; i < m; ++i) {
    if (cols[offset + static_cast<std::size_t>(i)] != "q" + std::to_string(i))
      throw SchemaError(where + ": expected column q" + std::to_string(i));
  }
  return m;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trace(const std::string& path, const TraceData& trace) {
  std::ofstream out = open_for_write(path);
  out << "# geomc trace\n";
  out << "# code_version: " << kCodeVersion << '\n';
  if (trace.seed) out << "# seed: " << *trace.seed << '\n';
  if (trace.chain) out << "# chain: " << *trace.chain << '\n';
  if (trace.config) out << "# config: " << trace.config->dump() << '\n';
  out << "step,branch,accept_prob,accepted,sq_jump";
  for (Eigen::Index j = 0; j < trace.q.cols(); ++j) out << ",q" << j;
  out << '\n';
  for (int s = 0; s < trace.n_steps(); ++s) {
    const auto i = static_cast<std::size_t>(s);
    out << (s + 1) << ',' << trace.branch[i] << ',' << format_double(trace.accept_prob[i]) << ','
        << trace.accepted[i] << ',' << format_double(trace.sq_jump[i]);
    for (Eigen::Index j = 0; j < trace.q.cols(); ++j) out << ',' << format_double(trace.q(s, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

TraceData read_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  TraceData trace;
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(1);
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      std::string key = body.substr(0, colon);
      key.erase(0, key.find_first_not_of(' '));
      const std::string value = body.substr(colon + 1);
      try {
        if (key == "seed") trace.seed = std::stoull(value);
        if (key == "chain") trace.chain = std::stoi(value);
        if (key == "config") trace.config = nlohmann::json::parse(value);
      } catch (const std::exception&) {
        throw SchemaError(path + ": malformed metadata line '" + line + "'");
      }
      continue;
    }
    header = split(line);
    break;
  }
  if (header.empty()) throw SchemaError(path + ": empty trace file");
  for (std::size_t i = 0; i < kTraceColumns.size(); ++i) {
    if (i >= header.size() || header[i] != kTraceColumns[i])
      throw SchemaError(path + ": header must start with step,branch,accept_prob,accepted,sq_jump");
  }
  const int m = check_q_columns(header, kTraceColumns.size(), path);

  std::vector<std::vector<double>> rows;
  long long line_no = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = path + " row " + std::to_string(line_no);
    if (cells.size() != header.size()) throw SchemaError(where + ": wrong number of columns");
    const long long step = parse_integer(cells[0], where);
    if (step != static_cast<long long>(trace.branch.size()) + 1) throw SchemaError(where + ": steps must be 1, 2, ...");
    trace.branch.push_back(static_cast<int>(parse_integer(cells[1], where)));
    trace.accept_prob.push_back(parse_double(cells[2], where));
    const long long acc = parse_integer(cells[3], where);
    if (acc != 0 && acc != 1) throw SchemaError(where + ": accepted must be 0 or 1");
    trace.accepted.push_back(static_cast<int>(acc));
    trace.sq_jump.push_back(parse_double(cells[4], where));
    std::vector<double> q(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) q[static_cast<std::size_t>(j)] = parse_double(cells[5 + static_cast<std::size_t>(j)], where);
    rows.push_back(std::move(q));
  }
  if (rows.empty()) throw SchemaError(path + ": trace has no records");
  trace.q.resize(static_cast<Eigen::Index>(rows.size()), m);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int j = 0; j < m; ++j) trace.q(static_cast<Eigen::Index>(r), j) = rows[r][static_cast<std::size_t>(j)];
  }
  return trace;
}

void write_samples_csv(const std::string& path, const Matrix& samples) {
  std::ofstream out = open_for_write(path);
  for (Eigen::Index j = 0; j < samples.cols(); ++j) out << (j ? "," : "") << 'q' << j;
  out << '\n';
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) out << (j ? "," : "") << format_double(samples(i, j));
    out << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

Matrix read_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file '" + path + "'");
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty() || line[0] == '#') continue;
    header = split(line);
    break;
  }
  if (header.empty()) throw SchemaError(path + ": empty sample file");
  const int m = check_q_columns(header, 0, path);
  std::vector<double> values;
  Eigen::Index n = 0;
  long long line_no = 0;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = path + " row " + std::to_string(line_no);
    if (static_cast<int>(cells.size()) != m) throw SchemaError(where + ": wrong number of columns");
    for (const auto& c : cells) values.push_back(parse_double(c, where));
    ++n;
  }
  if (n == 0) throw SchemaError(path + ": no samples");
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), n, m);
}

}  // namespace geomc
