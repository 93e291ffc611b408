#include "strkern/dense.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <sstream>
#include <ostream>
#include <unordered_map>

#include "strkern/errors.hpp"

namespace strkern {

DenseMatrix DenseMatrix::select(const std::vector<std::string>& ids) const {
  std::unordered_map<std::string_view, Eigen::Index> index;
  for (std::size_t i = 0; i < row_ids.size(); ++i) index.emplace(row_ids[i], static_cast<Eigen::Index>(i));
  DenseMatrix out;
  out.row_ids = ids;
  out.values.resize(static_cast<Eigen::Index>(ids.size()), values.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    auto it = index.find(ids[r]);
    if (it == index.end()) throw argument_error("no feature row for id '" + ids[r] + "'");
    out.values.row(static_cast<Eigen::Index>(r)) = values.row(it->second);
  }
  return out;
}

std::string format_double(double value, int significant) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, significant);
  return std::string(buf, res.ptr);
}

namespace {

struct Header {
  std::string magic;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

Header read_header(std::istream& in, std::initializer_list<std::string_view> accepted) {
  std::string line;
  if (!std::getline(in, line)) throw format_error("missing header line");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Header h;
  std::string version;
  std::istringstream ss(line);
  if (!(ss >> h.magic >> version >> h.rows >> h.cols)) {
    throw format_error("malformed header '" + line + "'");
  }
  bool known = false;
  for (auto a : accepted) known = known || h.magic == a;
  if (!known) throw format_error("unknown magic '" + h.magic + "'");
  if (version != "v1") throw format_error(h.magic + ": unsupported version " + version);
  return h;
}

/// Parses exactly `count` space-separated doubles from `text`.
void parse_values(std::string_view text, std::size_t count, double* out, std::size_t line_no) {
  const char* p = text.data();
  const char* end = text.data() + text.size();
  for (std::size_t k = 0; k < count; ++k) {
    while (p < end && *p == ' ') ++p;
    if (p == end) throw parse_error("expected " + std::to_string(count) + " values", line_no);
    // from_chars rejects a leading '+', which some writers emit
    if (*p == '+') ++p;
    auto res = std::from_chars(p, end, out[k]);
    if (res.ec != std::errc()) throw parse_error("bad number", line_no);
    p = res.ptr;
  }
  while (p < end && (*p == ' ' || *p == '\r')) ++p;
  if (p != end) throw parse_error("trailing data after " + std::to_string(count) + " values", line_no);
}

void write_values(std::ostream& out, const double* v, std::size_t count) {
  for (std::size_t k = 0; k < count; ++k) {
    if (k) out << ' ';
    out << format_double(v[k]);
  }
}

}  // namespace

void write_dense(std::ostream& out, const DenseMatrix& m) {
  if (m.row_ids.size() != m.rows()) throw argument_error("dense matrix ids do not match rows");
  out << "FSDM v1 " << m.rows() << ' ' << m.dim() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out << m.row_ids[i] << '\t';
    const auto row = m.values.row(static_cast<Eigen::Index>(i));
    write_values(out, row.data(), m.dim());
    out << '\n';
  }
}

DenseMatrix read_dense(std::istream& in) {
  const Header h = read_header(in, {"FSDM"});
  DenseMatrix m;
  m.values.resize(static_cast<Eigen::Index>(h.rows), static_cast<Eigen::Index>(h.cols));
  m.row_ids.reserve(h.rows);
  std::string line;
  std::size_t line_no = 1;
  for (std::size_t r = 0; r < h.rows; ++r) {
    ++line_no;
    if (!std::getline(in, line)) throw parse_error("fewer rows than the header declares", line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw parse_error("missing tab after id", line_no);
    m.row_ids.push_back(line.substr(0, tab));
    parse_values(std::string_view(line).substr(tab + 1), h.cols,
                 m.values.row(static_cast<Eigen::Index>(r)).data(), line_no);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line != "\r") throw parse_error("more rows than the header declares", line_no);
  }
  return m;
}

void save_dense(const std::filesystem::path& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write " + path.string());
  write_dense(out, m);
}

DenseMatrix load_dense(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return read_dense(in);
}

void write_word_occurrences(std::ostream& out, const std::vector<WordOccurrence>& occ,
                            std::size_t dim) {
  out << "FSWO v1 " << occ.size() << ' ' << dim << '\n';
  for (const auto& o : occ) {
    if (static_cast<std::size_t>(o.vector.size()) != dim) {
      throw argument_error("word vector dimension mismatch");
    }
    out << o.doc_id << '\t' << o.position << '\t' << o.word << '\t';
    write_values(out, o.vector.data(), dim);
    out << '\n';
  }
}

std::vector<WordOccurrence> read_word_occurrences(std::istream& in, std::size_t* dim) {
  const Header h = read_header(in, {"FSWO", "FSDM"});
  if (dim) *dim = h.cols;
  std::vector<WordOccurrence> occ;
  occ.reserve(h.rows);
  std::string line;
  std::size_t line_no = 1;
  for (std::size_t r = 0; r < h.rows; ++r) {
    ++line_no;
    if (!std::getline(in, line)) throw parse_error("fewer rows than the header declares", line_no);
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? t1 : line.find('\t', t1 + 1);
    const auto t3 = t2 == std::string::npos ? t2 : line.find('\t', t2 + 1);
    if (t3 == std::string::npos) throw parse_error("expected doc id, position and word", line_no);
    WordOccurrence o;
    o.doc_id = line.substr(0, t1);
    const std::string_view pos = std::string_view(line).substr(t1 + 1, t2 - t1 - 1);
    auto res = std::from_chars(pos.data(), pos.data() + pos.size(), o.position);
    if (res.ec != std::errc() || res.ptr != pos.data() + pos.size()) {
      throw parse_error("bad position", line_no);
    }
    o.word = line.substr(t2 + 1, t3 - t2 - 1);
    o.vector.resize(static_cast<Eigen::Index>(h.cols));
    parse_values(std::string_view(line).substr(t3 + 1), h.cols, o.vector.data(), line_no);
    occ.push_back(std::move(o));
  }
  return occ;
}

std::vector<WordOccurrence> load_word_occurrences(const std::filesystem::path& path,
                                                  std::size_t* dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return read_word_occurrences(in, dim);
}

DenseMatrix occurrence_means(const std::vector<WordOccurrence>& occ, std::size_t dim) {
  std::unordered_map<std::string_view, std::size_t> index;
  std::vector<std::size_t> counts;
  DenseMatrix out;
  std::vector<Vector> sums;
  for (const auto& o : occ) {
    auto [it, inserted] = index.try_emplace(o.doc_id, sums.size());
    if (inserted) {
      out.row_ids.push_back(o.doc_id);
      sums.push_back(Vector::Zero(static_cast<Eigen::Index>(dim)));
      counts.push_back(0);
    }
    sums[it->second] += o.vector;
    ++counts[it->second];
  }
  out.values.resize(static_cast<Eigen::Index>(sums.size()), static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < sums.size(); ++i) {
    out.values.row(static_cast<Eigen::Index>(i)) = sums[i] / static_cast<double>(counts[i]);
  }
  return out;
}

}  // namespace strkern
