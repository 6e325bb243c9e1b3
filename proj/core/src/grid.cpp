#include "bsq/grid.hpp"

#include <cmath>
#include <numbers>

#include "bsq/error.hpp"

namespace bsq::grid {

using std::numbers::pi;
using cd = std::complex<double>;

ThetaGrid::ThetaGrid(int n) : n_(n) {
  if (n < 1) fail(ErrorKind::Structural, "grid needs at least one node");
  int K = kmax();
  e_.resize(n, 2 * K + 1);
  for (int i = 0; i < n; ++i)
    for (int k = -K; k <= K; ++k) {
      // exact integer phase reduction keeps the table symmetric to round-off
      long long ph = (static_cast<long long>(k) * i) % n;
      e_(i, k + K) = std::polar(1.0, 2 * pi * static_cast<double>(ph) / n);
    }
}

Eigen::MatrixXcd ThetaGrid::synth(const Eigen::MatrixXcd& coef) const {
  int K = (static_cast<int>(coef.rows()) - 1) / 2;
  if (K > kmax()) fail(ErrorKind::Structural, "synth: more modes than the grid resolves");
  return e_.middleCols(kmax() - K, 2 * K + 1) * coef;
}

Eigen::MatrixXcd ThetaGrid::anal(const Eigen::MatrixXcd& vals, int K) const {
  if (K > kmax()) fail(ErrorKind::Structural, "anal: more modes than the grid resolves");
  return e_.middleCols(kmax() - K, 2 * K + 1).adjoint() * vals / static_cast<double>(n_);
}

Eigen::MatrixXcd ThetaGrid::derivative(const Eigen::MatrixXcd& vals, double omega) const {
  Eigen::MatrixXcd c = anal(vals);
  int K = kmax();
  for (int k = -K; k <= K; ++k) c.row(k + K) *= cd(0.0, 2 * pi * k * omega);
  return synth(c);
}

Eigen::MatrixXcd ThetaGrid::cohomology(const Eigen::MatrixXcd& vals, double omega, Eigen::RowVectorXcd* avg) const {
  Eigen::MatrixXcd c = anal(vals);
  int K = kmax();
  if (avg) *avg = c.row(K);
  for (int k = -K; k <= K; ++k) {
    if (k == 0)
      c.row(K).setZero();
    else
      c.row(k + K) /= cd(0.0, 2 * pi * k * omega);
  }
  return synth(c);
}

Eigen::RowVectorXcd eval_series(const Eigen::MatrixXcd& coef, double theta) {
  int K = (static_cast<int>(coef.rows()) - 1) / 2;
  Eigen::RowVectorXcd out = Eigen::RowVectorXcd::Zero(coef.cols());
  cd w = std::polar(1.0, 2 * pi * theta);
  cd z = std::polar(1.0, -2 * pi * theta * K);
  for (int k = -K; k <= K; ++k) {
    out += z * coef.row(k + K);
    z *= w;
  }
  return out;
}

Eigen::MatrixXcd pack(const std::vector<Eigen::MatrixXcd>& f) {
  if (f.empty()) return {};
  Eigen::Index r = f[0].rows(), c = f[0].cols();
  Eigen::MatrixXcd out(f.size(), r * c);
  for (size_t i = 0; i < f.size(); ++i) out.row(i) = Eigen::Map<const Eigen::RowVectorXcd>(f[i].data(), r * c);
  return out;
}

std::vector<Eigen::MatrixXcd> unpack(const Eigen::MatrixXcd& rows, int r, int c) {
  std::vector<Eigen::MatrixXcd> out(rows.rows());
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    Eigen::RowVectorXcd row = rows.row(i);
    out[i] = Eigen::Map<const Eigen::MatrixXcd>(row.data(), r, c);
  }
  return out;
}

Eigen::MatrixXcd eval_matrix_series(const Eigen::MatrixXcd& coef, int r, int c, double theta) {
  Eigen::RowVectorXcd v = eval_series(coef, theta);
  return Eigen::Map<const Eigen::MatrixXcd>(v.data(), r, c);
}

}  // namespace bsq::grid
