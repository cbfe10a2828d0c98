#pragma once

// CSV and JSON files. Dataset CSV: header x1,...,xp,y. LossMatrix CSV: header
// index,fold,loss with 0-based point indices and fold ids. Numbers are written
// with 17 significant digits so files round-trip exactly.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "cvinfer/data.hpp"

namespace cvinfer {

/// Throws io-error naming the path when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

nlohmann::json read_json_file(const std::filesystem::path& path);

/// Header-driven: columns named x1..xp in order and a final y.
Dataset parse_dataset_csv(const std::string& text, TargetKind kind = TargetKind::regression);
std::string format_dataset_csv(const Dataset& data);
Dataset read_dataset_csv(const std::filesystem::path& path,
                         TargetKind kind = TargetKind::regression);

/// n is the number of rows and k one more than the largest fold id.
LossMatrix parse_loss_matrix_csv(const std::string& text, LossKind kind = LossKind::plain);
std::string format_loss_matrix_csv(const LossMatrix& m);
LossMatrix read_loss_matrix_csv(const std::filesystem::path& path,
                                LossKind kind = LossKind::plain);

/// printf("%.17g").
std::string format_double(double x);

}  // namespace cvinfer
