#pragma once

#include <span>
#include <vector>

#include "tempocomp/matrix.hpp"
#include "tempocomp/nn.hpp"
#include "tempocomp/signal_encoding.hpp"

// Exact digital references the photonic paths are checked against. Kept
// deliberately independent: patch walking and reductions are written out
// here again rather than shared with the photonic code.
namespace tempocomp::oracle {

// Neumaier-compensated dot product.
double dot_digital(std::span<const double> a, std::span<const double> b);

Matrix conv2d_digital(const ImageTensor& img, const ConvSpec& spec);

std::vector<double> fc_digital(std::span<const double> v, const FcSpec& spec);

// patches x classifiers decision matrix, patches row-major.
Matrix detect_digital(const ImageTensor& img, const DetectionSpec& spec);

}  // namespace tempocomp::oracle
