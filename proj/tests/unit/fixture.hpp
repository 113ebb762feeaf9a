#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <stdexcept>
#include <string>

// Whitespace-separated numeric fixture reader.
class FixtureReader {
 public:
  explicit FixtureReader(const std::string& name) : in_(std::string(NORDIC_FIXTURES) + "/" + name) {
    if (!in_) throw std::runtime_error("missing fixture " + name);
  }

  double num() {
    double v;
    if (!(in_ >> v)) throw std::runtime_error("fixture truncated");
    return v;
  }
  int integer() { return static_cast<int>(num()); }

  Eigen::VectorXd vec(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = num();
    return v;
  }
  Eigen::MatrixXd mat(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = num();
    return m;
  }

 private:
  std::ifstream in_;
};
