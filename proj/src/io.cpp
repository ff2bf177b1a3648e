#include "tempocomp/io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <utility>

#include <json.hpp>

#include "tempocomp/errors.hpp"

namespace tempocomp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open " + path.string());
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(f),
                              std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, const void* data, size_t size) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open " + path.string() + " for writing");
  f.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!f) throw DataError("short write to " + path.string());
}

std::string read_file_text(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

void push_u32_le(std::vector<uint8_t>& out, uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<uint8_t>(v >> (8 * b)));
}

void push_f64_le(std::vector<uint8_t>& out, double v) {
  const uint64_t bits = std::bit_cast<uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(bits >> (8 * b)));
}

uint32_t get_u32_le(const uint8_t* p) {
  uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<uint32_t>(p[b]) << (8 * b);
  return v;
}

double get_f64_le(const uint8_t* p) {
  uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<uint64_t>(p[b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

// %.17g round-trips doubles exactly and keeps artifacts diffable
std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, const std::filesystem::path& path) {
  const char* begin = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + token.size() || token.empty()) {
    throw FormatError(path.string() + ": bad numeric field '" + token + "'");
  }
  return v;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    std::string line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

size_t IdxTensor::element_count() const {
  if (dims.empty()) return 0;
  size_t n = 1;
  for (uint32_t d : dims) n *= d;
  return n;
}

IdxTensor read_idx(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 4 || bytes[0] != 0 || bytes[1] != 0 || bytes[2] != 0x08) {
    throw FormatError(path.string() + ": not an unsigned-byte IDX file");
  }
  const size_t ndims = bytes[3];
  if (ndims == 0) throw FormatError(path.string() + ": IDX header declares zero dimensions");
  if (bytes.size() < 4 + 4 * ndims) throw FormatError(path.string() + ": truncated IDX header");
  IdxTensor t;
  t.dims.resize(ndims);
  for (size_t d = 0; d < ndims; ++d) {
    const uint8_t* p = bytes.data() + 4 + 4 * d;
    t.dims[d] = (static_cast<uint32_t>(p[0]) << 24) | (static_cast<uint32_t>(p[1]) << 16) |
                (static_cast<uint32_t>(p[2]) << 8) | static_cast<uint32_t>(p[3]);
  }
  const size_t expected = t.element_count();
  const size_t got = bytes.size() - 4 - 4 * ndims;
  if (got != expected) {
    throw FormatError(path.string() + ": IDX payload holds " + std::to_string(got) +
                      " bytes, header promises " + std::to_string(expected));
  }
  t.payload.assign(bytes.begin() + static_cast<ptrdiff_t>(4 + 4 * ndims), bytes.end());
  return t;
}

void write_idx(const IdxTensor& tensor, const std::filesystem::path& path) {
  if (tensor.dims.empty() || tensor.dims.size() > 255) {
    throw DimensionError("IDX tensors need 1..255 dimensions");
  }
  if (tensor.payload.size() != tensor.element_count()) {
    throw DimensionError("IDX payload of " + std::to_string(tensor.payload.size()) +
                         " bytes does not match dims product " +
                         std::to_string(tensor.element_count()));
  }
  std::vector<uint8_t> out;
  out.reserve(4 + 4 * tensor.dims.size() + tensor.payload.size());
  out.push_back(0);
  out.push_back(0);
  out.push_back(0x08);
  out.push_back(static_cast<uint8_t>(tensor.dims.size()));
  for (uint32_t d : tensor.dims) {
    out.push_back(static_cast<uint8_t>(d >> 24));
    out.push_back(static_cast<uint8_t>(d >> 16));
    out.push_back(static_cast<uint8_t>(d >> 8));
    out.push_back(static_cast<uint8_t>(d));
  }
  out.insert(out.end(), tensor.payload.begin(), tensor.payload.end());
  write_file_bytes(path, out.data(), out.size());
}

ImageTensor read_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < bytes.size()) {
      const char c = static_cast<char>(bytes[pos]);
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
      ++pos;
    }
    if (start == pos) throw FormatError(path.string() + ": truncated PGM header");
    return std::string(bytes.begin() + static_cast<ptrdiff_t>(start),
                       bytes.begin() + static_cast<ptrdiff_t>(pos));
  };
  auto next_size = [&]() -> size_t {
    const std::string tok = next_token();
    char* end = nullptr;
    const unsigned long long v = std::strtoull(tok.c_str(), &end, 10);
    if (end != tok.c_str() + tok.size() || tok.empty()) {
      throw FormatError(path.string() + ": bad PGM header field '" + tok + "'");
    }
    return static_cast<size_t>(v);
  };
  if (next_token() != "P5") throw FormatError(path.string() + ": only binary P5 PGM supported");
  const size_t width = next_size();
  const size_t height = next_size();
  const size_t maxval = next_size();
  if (maxval != 255) {
    throw FormatError(path.string() + ": PGM maxval must be 255, got " + std::to_string(maxval));
  }
  if (pos >= bytes.size()) throw FormatError(path.string() + ": missing PGM payload");
  ++pos;  // the single whitespace byte after maxval
  if (bytes.size() - pos != width * height) {
    throw FormatError(path.string() + ": PGM payload holds " + std::to_string(bytes.size() - pos) +
                      " bytes, header promises " + std::to_string(width * height));
  }
  return normalize_pixels(std::span<const uint8_t>(bytes.data() + pos, width * height), height,
                          width);
}

void write_pgm(const ImageTensor& img, const std::filesystem::path& path) {
  if (img.height == 0 || img.width == 0) throw DimensionError("cannot write an empty PGM");
  std::vector<uint8_t> out;
  const std::string header =
      "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.insert(out.end(), header.begin(), header.end());
  out.reserve(out.size() + img.size());
  for (double p : img.pixels) {
    const double clamped = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
    out.push_back(static_cast<uint8_t>(std::lround(clamped * 255.0)));
  }
  write_file_bytes(path, out.data(), out.size());
}

Waveform read_waveform(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 16 || bytes[0] != 'T' || bytes[1] != 'C' || bytes[2] != 'W' ||
      bytes[3] != 'F') {
    throw FormatError(path.string() + ": missing TCWF header");
  }
  const uint32_t kind_tag = get_u32_le(bytes.data() + 4);
  if (kind_tag > static_cast<uint32_t>(SignalKind::Voltage)) {
    throw FormatError(path.string() + ": unknown signal kind tag " + std::to_string(kind_tag));
  }
  const double rate = get_f64_le(bytes.data() + 8);
  if ((bytes.size() - 16) % 8 != 0) {
    throw FormatError(path.string() + ": truncated TCWF sample payload");
  }
  const size_t n = (bytes.size() - 16) / 8;
  std::vector<double> samples(n);
  for (size_t i = 0; i < n; ++i) samples[i] = get_f64_le(bytes.data() + 16 + 8 * i);
  return Waveform::create(std::move(samples), rate, static_cast<SignalKind>(kind_tag));
}

void write_waveform(const Waveform& w, const std::filesystem::path& path) {
  std::vector<uint8_t> out;
  out.reserve(16 + 8 * w.samples.size());
  out.push_back('T');
  out.push_back('C');
  out.push_back('W');
  out.push_back('F');
  push_u32_le(out, static_cast<uint32_t>(w.kind));
  push_f64_le(out, w.sample_rate);
  for (double s : w.samples) push_f64_le(out, s);
  write_file_bytes(path, out.data(), out.size());
}

void write_waveform_csv(const Waveform& w, const std::filesystem::path& path) {
  std::string text = "time_s,value\n";
  for (size_t i = 0; i < w.samples.size(); ++i) {
    text += format_double(static_cast<double>(i) / w.sample_rate);
    text += ',';
    text += format_double(w.samples[i]);
    text += '\n';
  }
  write_file_bytes(path, text.data(), text.size());
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file_text(path));
  std::vector<double> values;
  size_t rows = 0, cols = 0;
  for (const std::string& line : lines) {
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (rows == 0) {
      cols = fields.size();
    } else if (fields.size() != cols) {
      throw FormatError(path.string() + ": row " + std::to_string(rows + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(cols));
    }
    for (const std::string& f : fields) values.push_back(parse_double(f, path));
    ++rows;
  }
  if (rows == 0) throw FormatError(path.string() + ": no matrix rows");
  return Matrix(rows, cols, std::move(values));
}

void write_matrix_csv(const Matrix& m, const std::filesystem::path& path) {
  std::string text;
  for (size_t r = 0; r < m.rows; ++r) {
    for (size_t c = 0; c < m.cols; ++c) {
      if (c) text += ',';
      text += format_double(m.at(r, c));
    }
    text += '\n';
  }
  write_file_bytes(path, text.data(), text.size());
}

FcSpec read_fcspec_csv(const std::filesystem::path& path) {
  const auto lines = split_lines(read_file_text(path));
  if (lines.empty()) throw FormatError(path.string() + ": empty weight bank file");
  size_t classes = 0, dim = 0;
  if (std::sscanf(lines[0].c_str(), "# fcspec %zu %zu", &classes, &dim) != 2 || classes == 0 ||
      dim == 0) {
    throw FormatError(path.string() + ": first line must be '# fcspec <classes> <inputs>'");
  }
  std::vector<double> values;
  values.reserve(classes * dim);
  size_t rows = 0;
  for (size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = split_csv_line(lines[i]);
    if (fields.size() != dim) {
      throw FormatError(path.string() + ": weight row " + std::to_string(rows + 1) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(dim));
    }
    for (const std::string& f : fields) values.push_back(parse_double(f, path));
    ++rows;
  }
  if (rows != classes) {
    throw FormatError(path.string() + ": found " + std::to_string(rows) + " weight rows, header " +
                      "promises " + std::to_string(classes));
  }
  FcSpec spec;
  spec.weights = Matrix(classes, dim, std::move(values));
  spec.class_labels.resize(classes);
  for (size_t c = 0; c < classes; ++c) spec.class_labels[c] = static_cast<int>(c);
  spec.validate();
  return spec;
}

void write_fcspec_csv(const FcSpec& spec, const std::filesystem::path& path) {
  spec.validate();
  std::string text = "# fcspec " + std::to_string(spec.weights.rows) + " " +
                     std::to_string(spec.weights.cols) + "\n";
  for (size_t r = 0; r < spec.weights.rows; ++r) {
    for (size_t c = 0; c < spec.weights.cols; ++c) {
      if (c) text += ',';
      text += format_double(spec.weights.at(r, c));
    }
    text += '\n';
  }
  write_file_bytes(path, text.data(), text.size());
}

void ConfusionMatrix::add(size_t truth, size_t predicted) {
  if (truth >= classes || predicted >= classes) {
    throw DimensionError("confusion cell (" + std::to_string(truth) + "," +
                         std::to_string(predicted) + ") outside " + std::to_string(classes) +
                         " classes");
  }
  ++counts[truth * classes + predicted];
}

uint64_t ConfusionMatrix::total() const {
  uint64_t n = 0;
  for (uint64_t c : counts) n += c;
  return n;
}

double ConfusionMatrix::accuracy() const {
  const uint64_t n = total();
  if (n == 0) throw NumericError("confusion matrix holds no samples");
  uint64_t diag = 0;
  for (size_t c = 0; c < classes; ++c) diag += counts[c * classes + c];
  return static_cast<double>(diag) / static_cast<double>(n);
}

void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path) {
  std::string text;
  for (size_t r = 0; r < cm.classes; ++r) {
    for (size_t c = 0; c < cm.classes; ++c) {
      if (c) text += ',';
      text += std::to_string(cm.counts[r * cm.classes + c]);
    }
    text += '\n';
  }
  write_file_bytes(path, text.data(), text.size());
}

std::string plan_to_json(const ChannelPlan& plan) {
  ordered_json j;
  j["n_wavelengths"] = plan.n_wavelengths;
  j["n_spatial"] = plan.n_spatial;
  j["data_rows"] = plan.data_rows;
  j["inner_dim"] = plan.inner_dim;
  j["weight_rows"] = plan.weight_rows;
  // JSON has no -inf; an ideal demux simply omits the key
  if (std::isfinite(plan.crosstalk_db)) j["crosstalk_db"] = plan.crosstalk_db;
  ordered_json assignments = ordered_json::array();
  for (const Assignment& a : plan.assignments) {
    ordered_json row;
    row["data_row"] = a.data_row;
    row["weight_row"] = a.weight_row;
    row["wavelength"] = a.wavelength;
    row["spatial"] = a.spatial;
    row["slot"] = a.slot;
    assignments.push_back(std::move(row));
  }
  j["assignments"] = std::move(assignments);
  return j.dump(2) + "\n";
}

ChannelPlan plan_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plan JSON: ") + e.what());
  }
  try {
    ChannelPlan plan;
    for (const auto& [key, value] : j.items()) {
      if (key == "n_wavelengths") {
        plan.n_wavelengths = value.get<size_t>();
      } else if (key == "n_spatial") {
        plan.n_spatial = value.get<size_t>();
      } else if (key == "data_rows") {
        plan.data_rows = value.get<size_t>();
      } else if (key == "inner_dim") {
        plan.inner_dim = value.get<size_t>();
      } else if (key == "weight_rows") {
        plan.weight_rows = value.get<size_t>();
      } else if (key == "crosstalk_db") {
        plan.crosstalk_db = value.get<double>();
      } else if (key == "assignments") {
        for (const auto& row : value) {
          Assignment a;
          for (const auto& [akey, avalue] : row.items()) {
            if (akey == "data_row") {
              a.data_row = avalue.get<size_t>();
            } else if (akey == "weight_row") {
              a.weight_row = avalue.get<size_t>();
            } else if (akey == "wavelength") {
              a.wavelength = avalue.get<size_t>();
            } else if (akey == "spatial") {
              a.spatial = avalue.get<size_t>();
            } else if (akey == "slot") {
              a.slot = avalue.get<size_t>();
            } else {
              throw FormatError("plan JSON: unknown assignment key '" + akey + "'");
            }
          }
          plan.assignments.push_back(a);
        }
      } else {
        throw FormatError("plan JSON: unknown key '" + key + "'");
      }
    }
    plan.validate();
    return plan;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("plan JSON: ") + e.what());
  }
}

DigitDataset load_idx_dataset(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path) {
  const IdxTensor images = read_idx(images_path);
  const IdxTensor labels = read_idx(labels_path);
  if (images.dims.size() != 3) {
    throw FormatError(images_path.string() + ": expected images as count x height x width");
  }
  if (labels.dims.size() != 1) {
    throw FormatError(labels_path.string() + ": expected a flat label vector");
  }
  if (images.dims[0] != labels.dims[0]) {
    throw DataError("dataset holds " + std::to_string(images.dims[0]) + " images but " +
                    std::to_string(labels.dims[0]) + " labels");
  }
  const size_t count = images.dims[0];
  const size_t h = images.dims[1];
  const size_t w = images.dims[2];
  DigitDataset set;
  set.images.reserve(count);
  set.labels.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    set.images.push_back(
        normalize_pixels(std::span<const uint8_t>(images.payload.data() + i * h * w, h * w), h,
                         w));
    const uint8_t label = labels.payload[i];
    if (label > 9) {
      throw DataError(labels_path.string() + ": label " + std::to_string(label) + " outside 0..9");
    }
    set.labels.push_back(label);
  }
  return set;
}

std::optional<DigitDataset> try_load_idx_dataset(const std::filesystem::path& dir,
                                                 const std::string& stem) {
  std::filesystem::path base = dir;
  if (base.empty()) {
    const char* env = std::getenv("TEMPOCOMP_DATA_DIR");
    if (env == nullptr || *env == '\0') return std::nullopt;
    base = env;
  }
  const std::filesystem::path images = base / (stem + "-images-idx3-ubyte");
  const std::filesystem::path labels = base / (stem + "-labels-idx1-ubyte");
  std::error_code ec;
  if (!std::filesystem::exists(images, ec) || !std::filesystem::exists(labels, ec)) {
    return std::nullopt;
  }
  return load_idx_dataset(images, labels);
}

void write_idx_dataset(const DigitDataset& set, const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path) {
  if (set.images.size() != set.labels.size()) {
    throw DimensionError("dataset image and label counts differ");
  }
  if (set.images.empty()) throw DataError("refusing to write an empty dataset");
  const size_t h = set.images[0].height;
  const size_t w = set.images[0].width;
  IdxTensor images;
  images.dims = {static_cast<uint32_t>(set.images.size()), static_cast<uint32_t>(h),
                 static_cast<uint32_t>(w)};
  images.payload.reserve(set.images.size() * h * w);
  for (const ImageTensor& img : set.images) {
    if (img.height != h || img.width != w) {
      throw DimensionError("dataset images disagree on shape");
    }
    for (double p : img.pixels) {
      const double clamped = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
      images.payload.push_back(static_cast<uint8_t>(std::lround(clamped * 255.0)));
    }
  }
  IdxTensor labels;
  labels.dims = {static_cast<uint32_t>(set.labels.size())};
  labels.payload.reserve(set.labels.size());
  for (int l : set.labels) labels.payload.push_back(static_cast<uint8_t>(l));
  write_idx(images, images_path);
  write_idx(labels, labels_path);
}

}  // namespace tempocomp
