#include "transduct/data_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string_view>

namespace transduct {
namespace {

constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
constexpr std::size_t kHeaderBytes = 12;

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for " + path);
  return bytes;
}

std::uint32_t load_u32le(const char* p) {
  std::uint32_t v = 0;
  for (int b = 3; b >= 0; --b) v = (v << 8) | static_cast<unsigned char>(p[b]);
  return v;
}

void store_u32le(std::uint32_t v, char* p) {
  for (int b = 0; b < 4; ++b) p[b] = static_cast<char>((v >> (8 * b)) & 0xffu);
}

bool has_magic(const std::string& bytes) {
  return bytes.size() >= 4 && std::memcmp(bytes.data(), kMagic, 4) == 0;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

RawMatrix decode_emb1(const std::string& bytes, const std::string& path) {
  if (!has_magic(bytes)) throw Error(ErrorCode::BadMagic, path + " does not start with EMB1");
  if (bytes.size() < kHeaderBytes) throw Error(ErrorCode::TruncatedFile, path + " has an incomplete header");
  RawMatrix m;
  m.n_rows = load_u32le(bytes.data() + 4);
  m.dim = load_u32le(bytes.data() + 8);
  const std::uint64_t count = std::uint64_t{m.n_rows} * m.dim;
  const std::uint64_t payload = count * 4;
  if (payload > kMaxPayloadBytes) {
    throw Error(ErrorCode::ParseError, path + " declares a payload above the 1 GiB cap");
  }
  const std::uint64_t have = bytes.size() - kHeaderBytes;
  if (have < payload) {
    std::ostringstream msg;
    msg << path << ": header declares " << payload << " payload bytes, file has " << have;
    throw Error(ErrorCode::TruncatedFile, msg.str());
  }
  if (have > payload) {
    std::ostringstream msg;
    msg << path << ": " << (have - payload) << " trailing bytes after the declared payload";
    throw Error(ErrorCode::ParseError, msg.str());
  }
  m.values.resize(count);
  const char* p = bytes.data() + kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) m.values[i] = std::bit_cast<float>(load_u32le(p + 4 * i));
  return m;
}

Matrix parse_csv_matrix(const std::string& text, const std::string& path) {
  std::vector<double> values;
  std::size_t width = 0, rows = 0, line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::size_t cols = 0;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      std::string_view tok = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
      while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t')) tok.remove_suffix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (tok.empty() || ec != std::errc{} || ptr != tok.data() + tok.size()) {
        std::ostringstream msg;
        msg << path << ':' << line_no << ": cannot parse '" << tok << "' as a number";
        throw Error(ErrorCode::ParseError, msg.str());
      }
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << path << ':' << line_no << ": non-finite value";
        throw Error(ErrorCode::NonFiniteValue, msg.str());
      }
      values.push_back(v);
      ++cols;
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows == 0) {
      width = cols;
    } else if (cols != width) {
      std::ostringstream msg;
      msg << path << ':' << line_no << ": " << cols << " columns, expected " << width;
      throw Error(ErrorCode::RaggedCsv, msg.str());
    }
    ++rows;
  }
  if (rows == 0) throw Error(ErrorCode::ParseError, path + " contains no rows");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(width));
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

void write_bytes(const std::string& bytes, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path);
}

}  // namespace

RawMatrix read_emb1(const std::string& path) { return decode_emb1(slurp(path), path); }

void write_emb1(const RawMatrix& m, const std::string& path) {
  const std::uint64_t count = std::uint64_t{m.n_rows} * m.dim;
  if (count != m.values.size()) throw Error(ErrorCode::InvalidArgument, "raw matrix size does not match its shape");
  std::string bytes(kHeaderBytes + 4 * count, '\0');
  std::memcpy(bytes.data(), kMagic, 4);
  store_u32le(m.n_rows, bytes.data() + 4);
  store_u32le(m.dim, bytes.data() + 8);
  char* p = bytes.data() + kHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i) store_u32le(std::bit_cast<std::uint32_t>(m.values[i]), p + 4 * i);
  write_bytes(bytes, path);
}

EmbeddingMatrix read_embeddings(const std::string& path) {
  const std::string bytes = slurp(path);
  if (has_magic(bytes)) {
    const RawMatrix raw = decode_emb1(bytes, path);
    Matrix m(raw.n_rows, raw.dim);
    for (std::size_t i = 0; i < raw.values.size(); ++i) {
      const float v = raw.values[i];
      if (!std::isfinite(v)) {
        std::ostringstream msg;
        msg << path << ": non-finite value at flat index " << i;
        throw Error(ErrorCode::NonFiniteValue, msg.str());
      }
      m.data()[i] = static_cast<double>(v);
    }
    return EmbeddingMatrix::from_rows(std::move(m));
  }
  if (ends_with(path, ".csv")) return EmbeddingMatrix::from_rows(parse_csv_matrix(bytes, path));
  throw Error(ErrorCode::BadMagic, path + " is neither EMB1 nor a .csv file");
}

void write_embeddings(const Matrix& m, const std::string& path) {
  RawMatrix raw;
  raw.n_rows = static_cast<std::uint32_t>(m.rows());
  raw.dim = static_cast<std::uint32_t>(m.cols());
  raw.values.resize(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.size(); ++i) raw.values[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
  write_emb1(raw, path);
}

void write_embeddings(const EmbeddingMatrix& m, const std::string& path) { write_embeddings(m.data(), path); }

Labels read_labels(const std::string& path) {
  const std::string text = slurp(path);
  Labels out;
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (line.empty() || ec != std::errc{} || ptr != line.data() + line.size()) {
      std::ostringstream msg;
      msg << path << ':' << line_no << ": expected a class index, got '" << line << "'";
      throw Error(ErrorCode::ParseError, msg.str());
    }
    if (v < 0) {
      std::ostringstream msg;
      msg << path << ':' << line_no << ": negative label " << v;
      throw Error(ErrorCode::NegativeLabel, msg.str());
    }
    out.push_back(v);
  }
  return out;
}

void write_labels(const Labels& labels, const std::string& path) {
  std::string text;
  for (std::int64_t v : labels) {
    text += std::to_string(v);
    text += '\n';
  }
  write_bytes(text, path);
}

void write_predictions(const SimplexAssignments& a, const std::string& path) {
  const Eigen::Index kc = a.z.cols();
  std::string text = "index,pred,conf";
  for (Eigen::Index k = 0; k < kc; ++k) text += ",p_" + std::to_string(k);
  text += '\n';
  char buf[32];
  for (Eigen::Index i = 0; i < a.z.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < kc; ++k) {
      if (a.z(i, k) > a.z(i, best)) best = k;
    }
    text += std::to_string(i);
    text += ',';
    text += std::to_string(best);
    std::snprintf(buf, sizeof buf, ",%.9g", a.z(i, best));
    text += buf;
    for (Eigen::Index k = 0; k < kc; ++k) {
      std::snprintf(buf, sizeof buf, ",%.9g", a.z(i, k));
      text += buf;
    }
    text += '\n';
  }
  write_bytes(text, path);
}

std::vector<std::size_t> read_prediction_classes(const std::string& path) {
  const std::string text = slurp(path);
  std::vector<std::size_t> out;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos || text.compare(0, 15, "index,pred,conf") != 0) {
    throw Error(ErrorCode::ParseError, path + " is missing the predictions header");
  }
  ++pos;
  std::size_t line_no = 1;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::size_t c1 = line.find(',');
    if (c1 == std::string_view::npos) {
      std::ostringstream msg;
      msg << path << ':' << line_no << ": malformed prediction row";
      throw Error(ErrorCode::ParseError, msg.str());
    }
    const std::size_t c2 = line.find(',', c1 + 1);
    std::size_t v = 0;
    const char* first = line.data() + c1 + 1;
    const char* last = c2 == std::string_view::npos ? line.data() + line.size() : line.data() + c2;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
      std::ostringstream msg;
      msg << path << ':' << line_no << ": malformed prediction row";
      throw Error(ErrorCode::ParseError, msg.str());
    }
    out.push_back(v);
  }
  return out;
}

}  // namespace transduct
