#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "deepkrein/ksvm.hpp"
#include "deepkrein/netcore.hpp"

namespace deepkrein {

/// %.17g, which round-trips every finite double.
std::string format_double(double x);

/// d, then per layer "rows cols" and the row-major entries.
void write_weights(std::ostream& out, const WeightSet& w);
WeightSet read_weights(std::istream& in);
WeightSet load_weights(const std::filesystem::path& path);

/// CSV with header x0,...,x{D-1},y.
Dataset read_dataset(std::istream& in, const std::string& source = "<stream>");
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& data);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m);

/// Text model: lambda, kernel variant and architecture, training points, alpha.
void write_model(std::ostream& out, const TrainedKSVM& model);
TrainedKSVM read_model(std::istream& in);

std::string architecture_line(const Architecture& arch);

/// Writes to a sibling temp file, then renames over `path`.
void atomic_write(const std::filesystem::path& path, const std::string& content);

}  // namespace deepkrein
