#include "memoir/dataio.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>
#include <vector>

#include "memoir/error.hpp"

namespace memoir {

// ---------------------------------------------------------------- datasets

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

template <typename Int>
bool parse_uint(std::string_view s, Int& out) {
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

struct RawExample {
  ClassId label;
  std::vector<std::pair<FeatureId, double>> features;
};

}  // namespace

Dataset parse_dataset(std::istream& in, const ParseOptions& options) {
  Dataset data;
  if (options.labels) data.labels = *options.labels;
  std::vector<RawExample> raw;
  std::size_t max_feature = 0;
  bool any_feature = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    const auto tokens = split_ws(view);
    if (tokens.empty()) continue;
    const std::string_view label = tokens.front();
    if (label.find(':') != std::string_view::npos) {
      throw ParseError("missing label before feature '" + std::string(label) + "'", line_no);
    }
    if (label.find(',') != std::string_view::npos) {
      throw ParseError("multi-label rows are not supported", line_no);
    }
    RawExample ex;
    ex.label = data.labels.intern(std::string(label));
    ex.features.reserve(tokens.size() - 1);
    for (std::size_t k = 1; k < tokens.size(); ++k) {
      const std::string_view tok = tokens[k];
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("malformed feature token '" + std::string(tok) + "'", line_no);
      }
      const std::string_view idx_str = tok.substr(0, colon);
      const std::string_view val_str = tok.substr(colon + 1);
      if (!idx_str.empty() && idx_str.front() == '-') {
        throw ParseError("negative feature index in '" + std::string(tok) + "'", line_no);
      }
      std::uint64_t idx = 0;
      if (!parse_uint(idx_str, idx)) {
        throw ParseError("malformed feature index in '" + std::string(tok) + "'", line_no);
      }
      double val = 0.0;
      if (!parse_double(val_str, val)) {
        throw ParseError("malformed feature value in '" + std::string(tok) + "'", line_no);
      }
      if (!std::isfinite(val)) {
        throw ParseError("non-finite feature value in '" + std::string(tok) + "'", line_no);
      }
      if (!options.zero_based) {
        if (idx == 0) throw ParseError("feature index 0 in a 1-based file", line_no);
        --idx;
      }
      if (idx > std::numeric_limits<FeatureId>::max() - 1) {
        throw ParseError("feature index too large in '" + std::string(tok) + "'", line_no);
      }
      ex.features.emplace_back(static_cast<FeatureId>(idx), val);
    }
    std::sort(ex.features.begin(), ex.features.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t k = 1; k < ex.features.size(); ++k) {
      if (ex.features[k].first == ex.features[k - 1].first) {
        throw ParseError("duplicate feature id " +
                             std::to_string(ex.features[k].first + (options.zero_based ? 0 : 1)),
                         line_no);
      }
    }
    std::erase_if(ex.features, [](const auto& p) { return p.second == 0.0; });
    if (!ex.features.empty()) {
      max_feature = std::max<std::size_t>(max_feature, ex.features.back().first);
      any_feature = true;
    }
    raw.push_back(std::move(ex));
  }
  if (in.bad()) throw Error("read error while parsing dataset");
  if (raw.empty()) throw Error("empty dataset");

  data.dim = options.dim ? *options.dim : (any_feature ? max_feature + 1 : 0);
  data.num_classes = data.labels.size();
  if (options.num_classes) {
    if (*options.num_classes < data.labels.size()) {
      throw Error("forced class count " + std::to_string(*options.num_classes) +
                  " is smaller than the " + std::to_string(data.labels.size()) +
                  " labels present");
    }
    data.num_classes = *options.num_classes;
  }
  data.examples.reserve(raw.size());
  for (auto& ex : raw) {
    std::vector<FeatureId> idx;
    std::vector<double> val;
    idx.reserve(ex.features.size());
    val.reserve(ex.features.size());
    for (const auto& [i, v] : ex.features) {
      if (i >= data.dim) {
        ++data.dropped_features;
        continue;
      }
      idx.push_back(i);
      val.push_back(v);
    }
    data.examples.push_back({ex.label, SparseVector(data.dim, std::move(idx), std::move(val))});
  }
  return data;
}

Dataset parse_dataset(const std::string& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path + "'");
  return parse_dataset(in, options);
}

void write_dataset(std::ostream& out, const Dataset& data, bool zero_based) {
  const FeatureId offset = zero_based ? 0 : 1;
  for (const auto& ex : data.examples) {
    out << data.labels.name(ex.label);
    const auto idx = ex.features.indices();
    const auto val = ex.features.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out << ' ' << (idx[k] + offset) << ':' << format_double(val[k]);
    }
    out << '\n';
  }
}

void write_dataset(const std::string& path, const Dataset& data, bool zero_based) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset '" + path + "'");
  write_dataset(out, data, zero_based);
  if (!out) throw Error("write error on '" + path + "'");
}

// ------------------------------------------------------------------ models

namespace {

constexpr std::string_view kMagic = "MEMOIR1";
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::array<char, 4> kBinaryTrailer = {'E', 'N', 'D', '\0'};

void check_header(const WeightMatrix& w, const ModelHeader& header) {
  if (header.labels.size() != 0 && header.labels.size() != w.num_classes()) {
    throw ModelFormatError("label table size does not match the class count");
  }
  for (const auto& name : header.labels.names()) {
    if (name.empty() || name.find_first_of(" \t\r\n") != std::string::npos) {
      throw ModelFormatError("labels must be non-empty and free of whitespace");
    }
  }
  if (header.algorithm.find_first_of(" \t\r\n") != std::string::npos) {
    throw ModelFormatError("algorithm tag must be free of whitespace");
  }
}

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_integral_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t k = 0; k < sizeof(T); ++k) {
    bytes[k] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * k)) & 0xff);
  }
  out.write(bytes.data(), bytes.size());
}

void put_double(std::ostream& out, double v) {
  std::uint64_t bits = 0;
  std::memcpy(&bits, &v, sizeof bits);
  put<std::uint64_t>(out, bits);
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& in) {
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw ModelFormatError("truncated model file");
  }
  std::uint64_t v = 0;
  for (std::size_t k = 0; k < sizeof(T); ++k) v |= static_cast<std::uint64_t>(bytes[k]) << (8 * k);
  return static_cast<T>(v);
}

double get_double(std::istream& in) {
  const auto bits = get<std::uint64_t>(in);
  double v = 0.0;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

std::string get_string(std::istream& in, std::size_t limit) {
  const auto len = get<std::uint32_t>(in);
  if (len > limit) throw ModelFormatError("string field too long");
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (in.gcount() != static_cast<std::streamsize>(len)) {
    throw ModelFormatError("truncated model file");
  }
  return s;
}

void check_shape(std::uint64_t classes, std::uint64_t dim) {
  if (classes > std::numeric_limits<ClassId>::max() ||
      dim > std::numeric_limits<FeatureId>::max()) {
    throw ModelFormatError("model dimensions out of range");
  }
}

SparseVector make_row(std::size_t dim, std::vector<FeatureId> idx, std::vector<double> val) {
  for (double v : val) {
    if (!std::isfinite(v)) throw ModelFormatError("non-finite weight");
  }
  try {
    return SparseVector(dim, std::move(idx), std::move(val));
  } catch (const DimensionError& e) {
    throw ModelFormatError(std::string("corrupt row: ") + e.what());
  }
}

void save_text(std::ostream& out, const WeightMatrix& w, const ModelHeader& header) {
  out << kMagic << '\n';
  out << "format_version " << kFormatVersion << '\n';
  out << "classes " << w.num_classes() << '\n';
  out << "dim " << w.dim() << '\n';
  out << "lambda " << format_double(header.lambda) << '\n';
  out << "algorithm " << (header.algorithm.empty() ? "-" : header.algorithm) << '\n';
  out << "labels " << header.labels.size();
  for (const auto& name : header.labels.names()) out << ' ' << name;
  out << '\n';
  out << "rows\n";
  for (std::size_t c = 0; c < w.num_classes(); ++c) {
    const SparseVector row = w.materialize_row(static_cast<ClassId>(c));
    out << c << ' ' << row.nnz();
    const auto idx = row.indices();
    const auto val = row.values();
    for (std::size_t k = 0; k < idx.size(); ++k) out << ' ' << idx[k] << ':' << format_double(val[k]);
    out << '\n';
  }
  out << "end\n";
}

void save_binary(std::ostream& out, const WeightMatrix& w, const ModelHeader& header) {
  out.write(kMagic.data(), kMagic.size());
  out.put('\0');
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, w.num_classes());
  put<std::uint64_t>(out, w.dim());
  put_double(out, header.lambda);
  put_string(out, header.algorithm);
  put<std::uint64_t>(out, header.labels.size());
  for (const auto& name : header.labels.names()) put_string(out, name);
  for (std::size_t c = 0; c < w.num_classes(); ++c) {
    const SparseVector row = w.materialize_row(static_cast<ClassId>(c));
    put<std::uint64_t>(out, c);
    put<std::uint64_t>(out, row.nnz());
    const auto idx = row.indices();
    const auto val = row.values();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      put<std::uint32_t>(out, idx[k]);
      put_double(out, val[k]);
    }
  }
  out.write(kBinaryTrailer.data(), kBinaryTrailer.size());
}

// Reads "<key> <value...>" and returns the rest of the line.
std::string expect_field(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw ModelFormatError("truncated model file: missing " + key);
  if (line.rfind(key + " ", 0) != 0) {
    throw ModelFormatError("expected header field '" + key + "'");
  }
  return line.substr(key.size() + 1);
}

template <typename Int>
Int field_uint(const std::string& s, const std::string& key) {
  Int v{};
  if (!parse_uint(std::string_view(s), v)) throw ModelFormatError("bad value for " + key);
  return v;
}

Model load_text(std::istream& in) {
  Model m;
  const auto version = field_uint<std::uint32_t>(expect_field(in, "format_version"), "format_version");
  if (version != kFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  m.header.format_version = version;
  const auto classes = field_uint<std::uint64_t>(expect_field(in, "classes"), "classes");
  const auto dim = field_uint<std::uint64_t>(expect_field(in, "dim"), "dim");
  check_shape(classes, dim);
  m.header.num_classes = classes;
  m.header.dim = dim;
  if (!parse_double(expect_field(in, "lambda"), m.header.lambda)) {
    throw ModelFormatError("bad value for lambda");
  }
  m.header.algorithm = expect_field(in, "algorithm");
  if (m.header.algorithm == "-") m.header.algorithm.clear();
  {
    const std::string field = expect_field(in, "labels");
    const auto tokens = split_ws(field);
    std::uint64_t count = 0;
    if (tokens.empty() || !parse_uint(tokens.front(), count) || count + 1 != tokens.size() ||
        (count != 0 && count != classes)) {
      throw ModelFormatError("bad label table");
    }
    std::vector<std::string> names;
    for (std::size_t k = 1; k < tokens.size(); ++k) names.emplace_back(tokens[k]);
    m.header.labels = LabelMap(std::move(names));
    if (m.header.labels.size() != count) throw ModelFormatError("duplicate labels in model");
  }
  std::string line;
  if (!std::getline(in, line) || line != "rows") throw ModelFormatError("missing rows section");
  WeightMatrix w(classes, dim);
  for (std::uint64_t c = 0; c < classes; ++c) {
    if (!std::getline(in, line)) throw ModelFormatError("truncated model file: missing rows");
    const auto tokens = split_ws(line);
    std::uint64_t id = 0;
    std::uint64_t nnz = 0;
    if (tokens.size() < 2 || !parse_uint(tokens[0], id) || !parse_uint(tokens[1], nnz) ||
        id != c || nnz != tokens.size() - 2) {
      throw ModelFormatError("corrupt record for class " + std::to_string(c));
    }
    std::vector<FeatureId> idx;
    std::vector<double> val;
    for (std::size_t k = 2; k < tokens.size(); ++k) {
      const auto colon = tokens[k].find(':');
      std::uint32_t i = 0;
      double v = 0.0;
      if (colon == std::string_view::npos || !parse_uint(tokens[k].substr(0, colon), i) ||
          !parse_double(tokens[k].substr(colon + 1), v)) {
        throw ModelFormatError("corrupt entry in class " + std::to_string(c));
      }
      idx.push_back(i);
      val.push_back(v);
    }
    w.set_row(static_cast<ClassId>(c), make_row(dim, std::move(idx), std::move(val)));
  }
  if (!std::getline(in, line) || line != "end") {
    throw ModelFormatError("truncated model file: missing end marker");
  }
  m.weights = std::move(w);
  return m;
}

Model load_binary(std::istream& in) {
  Model m;
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  }
  m.header.format_version = version;
  const auto classes = get<std::uint64_t>(in);
  const auto dim = get<std::uint64_t>(in);
  check_shape(classes, dim);
  m.header.num_classes = classes;
  m.header.dim = dim;
  m.header.lambda = get_double(in);
  m.header.algorithm = get_string(in, 1 << 10);
  const auto label_count = get<std::uint64_t>(in);
  if (label_count != 0 && label_count != classes) throw ModelFormatError("bad label table");
  std::vector<std::string> names;
  for (std::uint64_t k = 0; k < label_count; ++k) names.push_back(get_string(in, 1 << 16));
  m.header.labels = LabelMap(std::move(names));
  if (m.header.labels.size() != label_count) throw ModelFormatError("duplicate labels in model");
  WeightMatrix w(classes, dim);
  for (std::uint64_t c = 0; c < classes; ++c) {
    const auto id = get<std::uint64_t>(in);
    const auto nnz = get<std::uint64_t>(in);
    if (id != c || nnz > dim) throw ModelFormatError("corrupt record for class " + std::to_string(c));
    std::vector<FeatureId> idx(nnz);
    std::vector<double> val(nnz);
    for (std::uint64_t k = 0; k < nnz; ++k) {
      idx[k] = get<std::uint32_t>(in);
      val[k] = get_double(in);
    }
    w.set_row(static_cast<ClassId>(c), make_row(dim, std::move(idx), std::move(val)));
  }
  std::array<char, 4> trailer{};
  in.read(trailer.data(), trailer.size());
  if (in.gcount() != 4 || trailer != kBinaryTrailer) {
    throw ModelFormatError("truncated model file: missing end marker");
  }
  m.weights = std::move(w);
  return m;
}

}  // namespace

void save_model(std::ostream& out, const WeightMatrix& w, const ModelHeader& header,
                ModelEncoding encoding) {
  check_header(w, header);
  if (encoding == ModelEncoding::text) {
    save_text(out, w, header);
  } else {
    save_binary(out, w, header);
  }
}

void save_model(const std::string& path, const WeightMatrix& w, const ModelHeader& header,
                ModelEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model '" + path + "'");
  save_model(out, w, header, encoding);
  out.flush();
  if (!out) throw Error("write error on '" + path + "'");
}

Model load_model(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 8 || std::string_view(magic.data(), 7) != kMagic) {
    throw ModelFormatError("not a model file (bad magic)");
  }
  if (magic[7] == '\n') return load_text(in);
  if (magic[7] == '\0') return load_binary(in);
  throw ModelFormatError("not a model file (bad magic)");
}

Model load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open model '" + path + "'");
  return load_model(in);
}

}  // namespace memoir
