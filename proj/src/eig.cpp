#include "olod/eig.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "olod/errors.hpp"
#include "olod/util.hpp"

namespace olod {

namespace {

constexpr int kDenseCutoff = 2048;

void fix_signs(Eigen::MatrixXd& V) {
  for (Eigen::Index c = 0; c < V.cols(); ++c) {
    Eigen::Index imax = 0;
    V.col(c).cwiseAbs().maxCoeff(&imax);
    if (V(imax, c) < 0) V.col(c) = -V.col(c);
  }
}

Eigen::VectorXd pair_residuals(const SpMat& K, const SpMat& M,
                               const Eigen::VectorXd& values,
                               const Eigen::MatrixXd& vectors) {
  Eigen::VectorXd r(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i)
    r(i) = (K * vectors.col(i) - values(i) * (M * vectors.col(i))).norm();
  return r;
}

EigenResult solve_symmetric_dense(const SpMat& K, const SpMat& M,
                                  const EigenOptions& opts) {
  const Eigen::Index n = K.rows();
  if (opts.count + 1 > n)
    throw InsufficientPairs("pencil too small for requested count");
  Eigen::MatrixXd Kd(K), Md(M);
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(
      0.5 * (Kd + Kd.transpose()), 0.5 * (Md + Md.transpose()));
  if (es.info() != Eigen::Success)
    throw SingularSystem("dense generalized eigensolve failed");
  const Eigen::VectorXd& lam = es.eigenvalues();  // ascending
  // The single trivial (constant) eigenvalue sits at the bottom.
  const double scale = std::abs(lam(std::min<Eigen::Index>(opts.count, n - 1)));
  if (std::abs(lam(0)) > 1e-6 * scale)
    throw SingularSystem("expected a trivial eigenvalue at zero");

  EigenResult out;
  out.values = lam.segment(1, opts.count);
  out.vectors = es.eigenvectors().middleCols(1, opts.count);
  fix_signs(out.vectors);
  out.residuals = pair_residuals(K, M, out.values, out.vectors);
  out.iterations = 0;
  return out;
}

EigenResult solve_symmetric_iterative(const SpMat& K, const SpMat& M,
                                      const EigenOptions& opts) {
  const Eigen::Index n = K.rows();
  const int m = opts.blockSize > 0
                    ? opts.blockSize
                    : static_cast<int>(std::min<Eigen::Index>(
                          std::max(opts.count + 4, 8), n - 1));
  if (m < opts.count)
    throw InsufficientPairs("block size below requested count");

  // Tiny positive shift: K alone is singular (constants); with the constant
  // mode deflated explicitly the shift only has to make the factorization
  // well defined, so it can sit far below the first eigenvalue.
  const double sigma = 1e-8 * (K.diagonal().sum() / M.diagonal().sum());
  SpMat A = K + sigma * M;
  Eigen::SimplicialLDLT<SpMat> ldlt(A);
  if (ldlt.info() != Eigen::Success)
    throw SingularSystem("shifted operator factorization failed");

  const Eigen::VectorXd m1 = M * Eigen::VectorXd::Ones(n);
  const double oneMass = m1.sum();  // 1^T M 1
  auto deflate = [&](Eigen::MatrixXd& X) {
    for (Eigen::Index c = 0; c < X.cols(); ++c)
      X.col(c) -= (m1.dot(X.col(c)) / oneMass) * Eigen::VectorXd::Ones(n);
  };
  auto m_orthonormalize = [&](Eigen::MatrixXd& X) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
    X = qr.householderQ() * Eigen::MatrixXd::Identity(n, X.cols());
    Eigen::MatrixXd G = X.transpose() * (M * X).eval();
    Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
    if (llt.info() != Eigen::Success)
      throw SingularSystem("subspace lost rank during orthonormalization");
    X = llt.matrixL().solve(X.transpose()).transpose();
  };

  Eigen::MatrixXd X(n, m);
  for (int c = 0; c < m; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      X(r, c) = 2.0 * uniform01(opts.seed, static_cast<std::uint64_t>(c),
                                static_cast<std::uint64_t>(r)) -
                1.0;
  deflate(X);
  m_orthonormalize(X);

  EigenResult out;
  Eigen::VectorXd lam;
  for (int it = 1; it <= opts.maxIterations; ++it) {
    Eigen::MatrixXd Y = ldlt.solve((M * X).eval());
    deflate(Y);
    m_orthonormalize(Y);
    Eigen::MatrixXd Am = Y.transpose() * (K * Y).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> rr(
        0.5 * (Am + Am.transpose()));
    if (rr.info() != Eigen::Success)
      throw SingularSystem("Rayleigh-Ritz eigensolve failed");
    X = Y * rr.eigenvectors();
    lam = rr.eigenvalues();

    bool done = true;
    Eigen::VectorXd res(opts.count);
    for (int i = 0; i < opts.count; ++i) {
      Eigen::VectorXd kx = K * X.col(i), mx = M * X.col(i);
      res(i) = (kx - lam(i) * mx).norm();
      double denom = kx.norm() + std::abs(lam(i)) * mx.norm();
      if (res(i) > opts.tol * denom) done = false;
    }
    if (done) {
      out.values = lam.head(opts.count);
      out.vectors = X.leftCols(opts.count);
      fix_signs(out.vectors);
      out.residuals = res;
      out.iterations = it;
      return out;
    }
    if (it == opts.maxIterations) {
      std::vector<double> r(res.data(), res.data() + res.size());
      throw NoConvergence("subspace iteration did not converge", r);
    }
  }
  throw NoConvergence("subspace iteration did not run", {});
}

}  // namespace

EigenResult solve_symmetric(const SpMat& K, const SpMat& M,
                            const EigenOptions& opts) {
  if (K.rows() != K.cols() || M.rows() != M.cols() || K.rows() != M.rows())
    throw Error("pencil dimensions disagree");
  if (opts.count < 1) throw Error("eigenpair count must be positive");
  if (K.rows() <= kDenseCutoff) return solve_symmetric_dense(K, M, opts);
  return solve_symmetric_iterative(K, M, opts);
}

EigenResult solve_pg(const Eigen::MatrixXd& K, const SpMat& M,
                     const EigenOptions& opts) {
  const Eigen::Index n = K.rows();
  if (K.cols() != n || M.rows() != n || M.cols() != n)
    throw Error("pencil dimensions disagree");
  if (opts.count + 1 > n)
    throw InsufficientPairs("pencil too small for requested count");

  Eigen::MatrixXd Md(M);
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges(K, Md, true);
  if (ges.info() != Eigen::Success)
    throw SingularSystem("QZ iteration failed");

  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  std::vector<Eigen::Index> idx;
  std::vector<std::complex<double>> lambda(static_cast<std::size_t>(n));
  double maxAbs = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (betas(i) == 0.0)
      throw SingularSystem("infinite eigenvalue in coarse pencil");
    lambda[static_cast<std::size_t>(i)] = alphas(i) / betas(i);
    maxAbs = std::max(maxAbs, std::abs(lambda[static_cast<std::size_t>(i)]));
    idx.push_back(i);
  }
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(lambda[static_cast<std::size_t>(a)]) <
           std::abs(lambda[static_cast<std::size_t>(b)]);
  });

  // The smallest-magnitude eigenvalue must be the constant mode.
  const Eigen::Index triv = idx.front();
  {
    Eigen::VectorXcd v = ges.eigenvectors().col(triv);
    double cosang = std::abs(v.dot(Eigen::VectorXcd::Ones(n))) /
                    (v.norm() * std::sqrt(double(n)));
    if (std::abs(lambda[static_cast<std::size_t>(triv)]) > 1e-6 * maxAbs ||
        cosang < 0.99)
      throw SingularSystem(
          "could not identify the trivial constant eigenvalue");
  }
  idx.erase(idx.begin());
  std::sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return lambda[static_cast<std::size_t>(a)].real() <
           lambda[static_cast<std::size_t>(b)].real();
  });
  if (static_cast<int>(idx.size()) < opts.count)
    throw InsufficientPairs("fewer non-trivial eigenvalues than requested");

  EigenResult out;
  out.values.resize(opts.count);
  out.vectors.resize(n, opts.count);
  for (int i = 0; i < opts.count; ++i) {
    const std::complex<double> lam = lambda[static_cast<std::size_t>(idx[i])];
    if (std::abs(lam.imag()) >
        opts.imagTol * std::max(std::abs(lam.real()), 1e-300))
      throw ComplexSpectrum("requested eigenvalue has an imaginary part");
    out.values(i) = lam.real();
    Eigen::VectorXd v = ges.eigenvectors().col(idx[i]).real();
    double mnorm = std::sqrt(v.dot(Md * v));
    out.vectors.col(i) = v / mnorm;
  }
  fix_signs(out.vectors);
  out.residuals.resize(opts.count);
  for (int i = 0; i < opts.count; ++i)
    out.residuals(i) = (K * out.vectors.col(i) -
                        out.values(i) * (Md * out.vectors.col(i)))
                           .norm();
  out.iterations = 0;
  return out;
}

double lowest_nontrivial_average(const EigenResult& result, int count) {
  if (result.values.size() < static_cast<Eigen::Index>(count))
    throw InsufficientPairs("result holds fewer eigenvalues than requested");
  return result.values.head(count).mean();
}

}  // namespace olod
