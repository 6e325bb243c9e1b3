#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bsq::grid {

// Uniform grid on the circle with exact trigonometric interpolation.
// Coefficient arrays are stored as rows k = -K..K.
class ThetaGrid {
 public:
  explicit ThetaGrid(int n = 1);

  int size() const { return n_; }
  int kmax() const { return (n_ - 1) / 2; }
  double theta(int i) const { return static_cast<double>(i) / n_; }

  Eigen::MatrixXcd synth(const Eigen::MatrixXcd& coef) const;
  Eigen::MatrixXcd anal(const Eigen::MatrixXcd& vals, int K) const;
  Eigen::MatrixXcd anal(const Eigen::MatrixXcd& vals) const { return anal(vals, kmax()); }
  // omega d/dtheta with all resolvable modes
  Eigen::MatrixXcd derivative(const Eigen::MatrixXcd& vals, double omega) const;
  // (omega d/dtheta)^{-1} of the zero-average part; the average is returned separately
  Eigen::MatrixXcd cohomology(const Eigen::MatrixXcd& vals, double omega, Eigen::RowVectorXcd* avg) const;

 private:
  int n_;
  Eigen::MatrixXcd e_;  // n x (2 kmax + 1), e_(i, k + kmax) = exp(2 pi i k theta_i)
};

// Evaluate sum_k coef.row(k) exp(2 pi i k theta), rows k = -K..K.
Eigen::RowVectorXcd eval_series(const Eigen::MatrixXcd& coef, double theta);

// Matrix fields sampled on the grid, packed as rows of the flattened matrix.
Eigen::MatrixXcd pack(const std::vector<Eigen::MatrixXcd>& f);
std::vector<Eigen::MatrixXcd> unpack(const Eigen::MatrixXcd& rows, int r, int c);
Eigen::MatrixXcd eval_matrix_series(const Eigen::MatrixXcd& coef, int r, int c, double theta);

}  // namespace bsq::grid
