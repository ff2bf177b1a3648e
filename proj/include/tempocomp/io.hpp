#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tempocomp/datagen.hpp"
#include "tempocomp/matrix.hpp"
#include "tempocomp/nn.hpp"
#include "tempocomp/signal_encoding.hpp"
#include "tempocomp/wdm.hpp"

namespace tempocomp {

// Raw IDX payload: unsigned bytes plus the big-endian dimension list.
struct IdxTensor {
  std::vector<uint32_t> dims;
  std::vector<uint8_t> payload;

  size_t element_count() const;
};

IdxTensor read_idx(const std::filesystem::path& path);
void write_idx(const IdxTensor& tensor, const std::filesystem::path& path);

// Binary PGM, P5 with maxval 255 only.
ImageTensor read_pgm(const std::filesystem::path& path);
void write_pgm(const ImageTensor& img, const std::filesystem::path& path);

// 16-byte header (magic "TCWF", u32 kind, f64 sample rate, little-endian)
// followed by little-endian f64 samples.
Waveform read_waveform(const std::filesystem::path& path);
void write_waveform(const Waveform& w, const std::filesystem::path& path);
// text twin: time_s,value rows
void write_waveform_csv(const Waveform& w, const std::filesystem::path& path);

Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const Matrix& m, const std::filesystem::path& path);

// Weight bank CSV: "# fcspec C D" header, then one row per class. Labels are
// the row indices.
FcSpec read_fcspec_csv(const std::filesystem::path& path);
void write_fcspec_csv(const FcSpec& spec, const std::filesystem::path& path);

struct ConfusionMatrix {
  size_t classes = 0;
  std::vector<uint64_t> counts;  // row = true label, column = predicted

  explicit ConfusionMatrix(size_t n_classes = 0)
      : classes(n_classes), counts(n_classes * n_classes, 0) {}

  void add(size_t truth, size_t predicted);
  uint64_t total() const;
  double accuracy() const;
};

void write_confusion_csv(const ConfusionMatrix& cm, const std::filesystem::path& path);

// Plan JSON: channel grid, shape, crosstalk (omitted when ideal), and the
// assignments array.
std::string plan_to_json(const ChannelPlan& plan);
ChannelPlan plan_from_json(const std::string& text);

// IDX image/label pair in MNIST layout (images n x h x w, labels n).
DigitDataset load_idx_dataset(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path);

// Looks for <stem>-images-idx3-ubyte / <stem>-labels-idx1-ubyte under dir,
// falling back to TEMPOCOMP_DATA_DIR when dir is empty. Empty optional when
// the files are not there.
std::optional<DigitDataset> try_load_idx_dataset(const std::filesystem::path& dir,
                                                 const std::string& stem);

void write_idx_dataset(const DigitDataset& set, const std::filesystem::path& images_path,
                       const std::filesystem::path& labels_path);

}  // namespace tempocomp
