#include "deepkrein/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <unistd.h>

#include "deepkrein/errors.hpp"

namespace deepkrein {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_weights(std::ostream& out, const WeightSet& w) {
  out << w.depth() << '\n';
  for (const auto& m : w.layers()) {
    out << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c) out << ' ';
        out << format_double(m(r, c));
      }
      out << '\n';
    }
  }
}

namespace {

template <typename T>
T read_token(std::istream& in, const char* what) {
  T value;
  if (!(in >> value)) throw ValidationError(std::string("malformed file: expected ") + what);
  return value;
}

double read_real(std::istream& in, const char* what) {
  // Read as text so "inf" and "nan" are rejected explicitly.
  const auto token = read_token<std::string>(in, what);
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(token, &used);
  } catch (const std::exception&) {
    throw ValidationError(std::string("malformed number '") + token + "' for " + what);
  }
  if (used != token.size() || !std::isfinite(v)) {
    throw ValidationError(std::string("malformed number '") + token + "' for " + what);
  }
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

WeightSet read_weights(std::istream& in) {
  const int d = read_token<int>(in, "layer count");
  if (d < 1) throw ValidationError("weight file must have at least one layer");
  std::vector<Eigen::MatrixXd> layers;
  for (int q = 0; q < d; ++q) {
    const int rows = read_token<int>(in, "rows");
    const int cols = read_token<int>(in, "cols");
    if (rows < 1 || cols < 1) throw ValidationError("weight matrix shapes must be positive");
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) m(r, c) = read_real(in, "weight entry");
    }
    layers.push_back(std::move(m));
  }
  std::string rest;
  if (in >> rest) throw ValidationError("trailing content in weight file: '" + rest + "'");
  return WeightSet(std::move(layers));
}

WeightSet load_weights(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open weight file " + path.string());
  return read_weights(in);
}

Dataset read_dataset(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(source + ": empty dataset file");
  const auto header = split_csv(line);
  if (header.size() < 2 || header.back() != "y") {
    throw ValidationError(source + ":1: header must be x0,...,x{D-1},y");
  }
  const std::size_t dim = header.size() - 1;
  for (std::size_t j = 0; j < dim; ++j) {
    if (header[j] != "x" + std::to_string(j)) {
      throw ValidationError(source + ":1: column " + std::to_string(j + 1) + " must be named x" + std::to_string(j));
    }
  }
  std::vector<std::vector<double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != dim + 1) {
      throw ValidationError(source + ":" + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) +
                            " columns, found " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cells[j], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != cells[j].size() || cells[j].empty() || !std::isfinite(v)) {
        throw ValidationError(source + ":" + std::to_string(lineno) + ": column " + std::to_string(j + 1) +
                              " is not a finite number");
      }
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(source + ": dataset has no samples");
  Dataset data;
  data.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(dim));
  data.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) data.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    data.y[static_cast<Eigen::Index>(i)] = rows[i][dim];
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset " + path.string());
  return read_dataset(in, path.string());
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (int j = 0; j < data.dim(); ++j) out << 'x' << j << ',';
  out << "y\n";
  for (int i = 0; i < data.size(); ++i) {
    for (int j = 0; j < data.dim(); ++j) out << format_double(data.x(i, j)) << ',';
    out << format_double(data.y[i]) << '\n';
  }
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

std::string architecture_line(const Architecture& arch) {
  std::string s = std::to_string(arch.input_dim()) + " " + std::to_string(arch.depth());
  for (int h : arch.widths()) s += " " + std::to_string(h);
  for (const auto& a : arch.activations()) {
    s += " " + a.name();
    if (a.kind() == ActivationKind::Polynomial) {
      s += " " + std::to_string(a.polynomial_coefficients().size());
      for (double c : a.polynomial_coefficients()) s += " " + format_double(c);
    } else if (a.kind() == ActivationKind::ReluSurrogate) {
      s += " " + format_double(a.sharpness());
    }
  }
  return s;
}

namespace {

Architecture read_architecture(std::istream& in) {
  const int dim = read_token<int>(in, "input dimension");
  const int depth = read_token<int>(in, "depth");
  if (depth < 1 || depth > 64) throw ValidationError("model depth out of range");
  std::vector<int> widths;
  for (int q = 0; q < depth; ++q) widths.push_back(read_token<int>(in, "width"));
  std::vector<ActivationSpec> acts;
  for (int q = 0; q < depth; ++q) {
    const auto name = read_token<std::string>(in, "activation");
    std::vector<double> coeffs;
    double c = ActivationSpec::kDefaultReluSharpness;
    if (name == "polynomial") {
      const int k = read_token<int>(in, "coefficient count");
      for (int i = 0; i < k; ++i) coeffs.push_back(read_real(in, "coefficient"));
    } else if (name == "relu_surrogate") {
      c = read_real(in, "sharpness");
    }
    acts.push_back(ActivationSpec::from_name(name, coeffs, c));
  }
  return Architecture(dim, std::move(widths), std::move(acts));
}

void expect_word(std::istream& in, const std::string& word) {
  const auto got = read_token<std::string>(in, word.c_str());
  if (got != word) throw ValidationError("malformed model file: expected '" + word + "', found '" + got + "'");
}

}  // namespace

void write_model(std::ostream& out, const TrainedKSVM& model) {
  const auto& def = model.kernel_definition();
  out << "lambda " << format_double(model.lambda()) << '\n';
  out << "kernel " << kernel_variant_name(def.variant()) << '\n';
  out << "architecture " << architecture_line(def.architecture()) << '\n';
  out << "points " << model.points().rows() << ' ' << model.points().cols() << '\n';
  for (Eigen::Index i = 0; i < model.points().rows(); ++i) {
    for (Eigen::Index j = 0; j < model.points().cols(); ++j) {
      if (j) out << ' ';
      out << format_double(model.points()(i, j));
    }
    out << '\n';
  }
  out << "alpha " << model.alpha().size() << '\n';
  for (Eigen::Index i = 0; i < model.alpha().size(); ++i) out << format_double(model.alpha()[i]) << '\n';
}

TrainedKSVM read_model(std::istream& in) {
  expect_word(in, "lambda");
  const double lambda = read_real(in, "lambda");
  expect_word(in, "kernel");
  const auto variant = kernel_variant_from_name(read_token<std::string>(in, "kernel variant"));
  expect_word(in, "architecture");
  Architecture arch = read_architecture(in);
  expect_word(in, "points");
  const int n = read_token<int>(in, "point count");
  const int dim = read_token<int>(in, "point dimension");
  if (n < 1 || dim < 1) throw ValidationError("model must have at least one training point");
  Eigen::MatrixXd points(n, dim);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dim; ++j) points(i, j) = read_real(in, "point entry");
  }
  expect_word(in, "alpha");
  const int na = read_token<int>(in, "alpha count");
  if (na != n) throw ValidationError("model alpha count does not match the point count");
  Eigen::VectorXd alpha(na);
  for (int i = 0; i < na; ++i) alpha[i] = read_real(in, "alpha entry");
  return TrainedKSVM(std::move(alpha), std::move(points), lambda, KernelDefinition(std::move(arch), variant));
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw ValidationError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move report into place at " + path.string());
  }
}

}  // namespace deepkrein
