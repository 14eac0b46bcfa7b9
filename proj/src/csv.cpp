// csv.cpp — deterministic CSV serialization of baths, trajectories, and analysis series.
#include "spinmap/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spinmap/bloch.hpp"
#include "spinmap/errors.hpp"

namespace spinmap::io {

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary: keep '\n' endings on all platforms
  if (!out) throw AnalysisError("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw AnalysisError("cannot open for reading: " + path);
  return in;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& field, const std::string& path) {
  try {
    std::size_t pos = 0;
    const double value = std::stod(field, &pos);
    if (pos != field.size()) throw std::invalid_argument(field);
    return value;
  } catch (const std::exception&) {
    throw AnalysisError("malformed numeric field '" + field + "' in " + path);
  }
}

// Reads all data rows, verifying the header matches `expected` exactly.
std::vector<std::vector<double>> read_table(const std::string& path, const std::string& expected) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw AnalysisError("empty CSV file: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected)
    throw AnalysisError("unexpected header in " + path + ": got '" + line + "', want '" +
                        expected + "'");
  std::vector<std::vector<double>> rows;
  const std::size_t n_cols = split_row(expected).size();
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_row(line);
    if (fields.size() != n_cols)
      throw AnalysisError("row with " + std::to_string(fields.size()) + " fields (want " +
                          std::to_string(n_cols) + ") in " + path);
    std::vector<double> row(n_cols);
    for (std::size_t i = 0; i < n_cols; ++i) row[i] = parse_double(fields[i], path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw AnalysisError("CSV file has no data rows: " + path);
  return rows;
}

void write_row(std::ofstream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << format_double(values[i]);
  }
  out << '\n';
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_bath_csv(const std::string& path, const spectral::DiscretizedBath& bath) {
  std::ofstream out = open_out(path);
  out << "index,omega,coupling\n";
  for (std::size_t n = 0; n < bath.omega.size(); ++n)
    out << n << ',' << format_double(bath.omega[n]) << ',' << format_double(bath.coupling[n])
        << '\n';
}

spectral::DiscretizedBath read_bath_csv(const std::string& path) {
  spectral::DiscretizedBath bath;
  for (const std::vector<double>& row : read_table(path, "index,omega,coupling")) {
    bath.omega.push_back(row[1]);
    bath.coupling.push_back(row[2]);
  }
  return bath;
}

void write_trajectory_csv(const std::string& path, const propagator::Trajectory& traj) {
  std::ofstream out = open_out(path);
  out << "t,rho00,rho01_re,rho01_im,rho11,sx,sy,sz\n";
  for (std::size_t k = 0; k < traj.t.size(); ++k) {
    const Eigen::Matrix2cd& rho = traj.rho[k];
    write_row(out, {traj.t[k], rho(0, 0).real(), rho(0, 1).real(), rho(0, 1).imag(),
                    rho(1, 1).real(), 2.0 * rho(0, 1).real(), -2.0 * rho(0, 1).imag(),
                    rho(0, 0).real() - rho(1, 1).real()});
  }
}

propagator::Trajectory read_trajectory_csv(const std::string& path) {
  propagator::Trajectory traj;
  for (const std::vector<double>& row : read_table(path, "t,rho00,rho01_re,rho01_im,rho11,sx,sy,sz")) {
    traj.t.push_back(row[0]);
    Eigen::Matrix2cd rho;
    rho(0, 0) = row[1];
    rho(0, 1) = std::complex<double>(row[2], row[3]);
    rho(1, 0) = std::conj(rho(0, 1));
    rho(1, 1) = row[4];
    traj.rho.push_back(rho);
  }
  return traj;
}

void write_svd_csv(const std::string& path, const dynmap::SvdSeries& svd) {
  if (svd.dim != 2)
    throw AnalysisError("svd CSV schema covers two-level systems only");
  std::ofstream out = open_out(path);
  out << "t,S1,S2,S3,b1,b2,b3\n";
  for (std::size_t k = 0; k < svd.t.size(); ++k)
    write_row(out, {svd.t[k], svd.s[k](0), svd.s[k](1), svd.s[k](2), svd.b[k](0), svd.b[k](1),
                    svd.b[k](2)});
}

dynmap::SvdSeries read_svd_csv(const std::string& path) {
  dynmap::SvdSeries svd;
  svd.dim = 2;
  for (const std::vector<double>& row : read_table(path, "t,S1,S2,S3,b1,b2,b3")) {
    svd.t.push_back(row[0]);
    svd.s.push_back(Eigen::Vector3d(row[1], row[2], row[3]));
    svd.b.push_back(Eigen::Vector3d(row[4], row[5], row[6]));
  }
  return svd;
}

void write_map_csv(const std::string& path, const dynmap::AffineBlochMap& affine) {
  if (affine.dim != 2)
    throw AnalysisError("map CSV schema covers two-level systems only");
  std::ofstream out = open_out(path);
  out << "t,m11,m12,m13,m21,m22,m23,m31,m32,m33,b1,b2,b3\n";
  for (std::size_t k = 0; k < affine.t.size(); ++k) {
    const Eigen::MatrixXd& m = affine.m[k];
    write_row(out, {affine.t[k], m(0, 0), m(0, 1), m(0, 2), m(1, 0), m(1, 1), m(1, 2), m(2, 0),
                    m(2, 1), m(2, 2), affine.b[k](0), affine.b[k](1), affine.b[k](2)});
  }
}

dynmap::AffineBlochMap read_map_csv(const std::string& path) {
  dynmap::AffineBlochMap affine;
  affine.dim = 2;
  for (const std::vector<double>& row :
       read_table(path, "t,m11,m12,m13,m21,m22,m23,m31,m32,m33,b1,b2,b3")) {
    affine.t.push_back(row[0]);
    Eigen::Matrix3d m;
    m << row[1], row[2], row[3], row[4], row[5], row[6], row[7], row[8], row[9];
    affine.m.push_back(m);
    affine.b.push_back(Eigen::Vector3d(row[10], row[11], row[12]));
  }
  return affine;
}

void write_bound_csv(const std::string& path, const dynmap::BoundReport& report) {
  std::ofstream out = open_out(path);
  out << "t,delta,bound_general,bound_sigma_z\n";
  for (std::size_t k = 0; k < report.t.size(); ++k)
    write_row(out, {report.t[k], report.delta[k], report.bound_general[k], report.bound_sharp[k]});
}

}  // namespace spinmap::io
