#pragma once

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "etfsel/latent_factor.hpp"
#include "etfsel/returns_panel.hpp"
#include "etfsel/rng.hpp"
#include "etfsel/ssvs.hpp"

namespace testutil {

// Scratch directory wiped on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag) {
    path = std::filesystem::temp_directory_path() /
           ("etfsel_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path);
  out << contents;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string month(int i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "%04d-%02d", 2000 + i / 12, 1 + i % 12);
  return buf;
}

inline etfsel::ReturnsPanel make_panel(const std::vector<std::string>& labels,
                                       const Eigen::MatrixXd& values, int first_month = 0) {
  etfsel::ReturnsPanel p;
  p.labels = labels;
  p.values = values;
  for (Eigen::Index t = 0; t < values.rows(); ++t)
    p.dates.push_back(month(first_month + static_cast<int>(t)));
  return p;
}

// Synthetic regression data: q target columns generated from `n_true`
// candidate columns plus noise. Returns aligned panels.
inline etfsel::AlignedData synthetic_regression(int T, int p, int q, int n_true,
                                                double noise_sd, std::uint64_t seed) {
  etfsel::Rng rng(seed);
  Eigen::MatrixXd X(T, p);
  for (int t = 0; t < T; ++t)
    for (int j = 0; j < p; ++j) X(t, j) = 0.01 + 0.03 * rng.normal();
  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(p, q);
  for (int a = 0; a < n_true; ++a)
    for (int i = 0; i < q; ++i) beta(a, i) = 0.5 + 0.5 * rng.uniform();
  Eigen::MatrixXd R = X * beta;
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < q; ++i) R(t, i) += noise_sd * rng.normal();

  std::vector<std::string> xl, rl;
  for (int j = 0; j < p; ++j) xl.push_back("X" + std::to_string(j));
  for (int i = 0; i < q; ++i) rl.push_back("R" + std::to_string(i));
  etfsel::AlignedData data;
  data.candidates = make_panel(xl, X);
  data.targets = make_panel(rl, R);
  return data;
}

// Scripted paired posterior draws, unrelated to the samplers.
struct FakeDraws {
  std::vector<etfsel::ConditionalDraw> cond;
  std::vector<etfsel::FactorDraw> fact;
};

inline FakeDraws make_fake_draws(int n, int p, int q, std::uint64_t seed,
                                 double scale = 1.0) {
  etfsel::Rng rng(seed);
  FakeDraws out;
  for (int d = 0; d < n; ++d) {
    etfsel::ConditionalDraw cd;
    cd.gamma = etfsel::ModelIndicator::empty(p);
    cd.beta.resize(p, q);
    for (int j = 0; j < p; ++j) {
      cd.gamma.set(j, true);
      for (int i = 0; i < q; ++i) cd.beta(j, i) = scale * rng.normal();
    }
    cd.psi_resid.resize(q);
    cd.sigma.resize(q);
    for (int i = 0; i < q; ++i) {
      cd.psi_resid[i] = scale * (0.5 + rng.uniform());
      cd.sigma[i] = std::sqrt(cd.psi_resid[i]);
    }
    etfsel::FactorDraw fd;
    Eigen::MatrixXd A(p, p);
    for (int r = 0; r < p; ++r)
      for (int c = 0; c < p; ++c) A(r, c) = rng.normal();
    fd.sigma_x = scale * (A * A.transpose() + 0.5 * double(p) * Eigen::MatrixXd::Identity(p, p));
    fd.mu_x.resize(p);
    for (int j = 0; j < p; ++j) fd.mu_x[j] = scale * rng.normal();
    fd.psi = Eigen::VectorXd::Ones(p);
    fd.B = Eigen::MatrixXd::Zero(p, 1);
    out.cond.push_back(std::move(cd));
    out.fact.push_back(std::move(fd));
  }
  return out;
}

}  // namespace testutil
