#include "hardylab/operators.hpp"

#include <stdexcept>

namespace hardylab {

WoldVector OperatorMatrix::apply(const WoldVector& v) const {
  if (!v.frame->compatible(*domain))
    throw std::invalid_argument("apply: frame mismatch");
  return {codomain, mat * v.coords};
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return {codomain, domain, mat.adjoint(), exactness, column_residual};
}

OperatorMatrix toeplitz_forward(const FramePtr& frame) {
  const int dim = frame->dim();
  const int lm = frame->l() * frame->m();
  Mat M = Mat::Zero(dim, dim);
  for (int i = 0; i + lm < dim; ++i) M(i + lm, i) = 1.0;
  return {frame, frame, std::move(M), Exactness::truncation_leaky, 0.0};
}

OperatorMatrix toeplitz_adjoint(const FramePtr& frame) {
  if (!frame->B().vanishes_at_zero())
    throw std::invalid_argument("toeplitz_adjoint: symbol must vanish at zero");
  const int dim = frame->dim();
  const int lm = frame->l() * frame->m();
  Mat M = Mat::Zero(dim, dim);
  for (int i = 0; i + lm < dim; ++i) M(i, i + lm) = 1.0;
  return {frame, frame, std::move(M), Exactness::exact, 0.0};
}

OperatorMatrix multiplier_matrix(const Vec& symbol_taylor, const FramePtr& frame) {
  if (symbol_taylor.size() > frame->D() + 1)
    throw std::invalid_argument("multiplier_matrix: symbol degree exceeds D");
  Vec sym = Vec::Zero(frame->D() + 1);
  sym.head(symbol_taylor.size()) = symbol_taylor;
  const int rows = frame->N() * frame->l();
  const int m = frame->m();
  // scalar block: column r holds the frame coordinates of sym * (B^n e_j)
  Mat scal = Mat::Zero(rows, rows);
  double worst = 0.0;
  for (int c = 0; c < rows; ++c) {
    const Vec prod = series::mul(sym, frame->scalar_funcs().row(c).transpose());
    double norm2_left = prod.squaredNorm();
    for (int r = 0; r < rows; ++r) {
      const cplx ip = (frame->scalar_funcs().row(r).conjugate().array() *
                       prod.transpose().array()).sum();
      scal(r, c) = ip;
      norm2_left -= std::norm(ip);
    }
    worst = std::max(worst, std::sqrt(std::max(0.0, norm2_left)));
  }
  const int dim = frame->dim();
  Mat M = Mat::Zero(dim, dim);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < rows; ++c)
      if (scal(r, c) != 0.0)
        for (int s = 0; s < m; ++s) M(r * m + s, c * m + s) = scal(r, c);
  return {frame, frame, std::move(M), Exactness::truncation_leaky, worst};
}

OperatorMatrix multiplier_matrix(const BlaschkeProduct& C, const FramePtr& frame) {
  return multiplier_matrix(C.taylor(frame->D()), frame);
}

OperatorMatrix vector_multiplier(const H2Element& sym, const FramePtr& scalar_frame,
                                 const FramePtr& vec_frame) {
  if (scalar_frame->m() != 1 || sym.m != vec_frame->m() ||
      sym.D() != vec_frame->D() || scalar_frame->D() != vec_frame->D() ||
      !(scalar_frame->B() == vec_frame->B()) || scalar_frame->N() != vec_frame->N())
    throw std::invalid_argument("vector_multiplier: frame mismatch");
  const int in_rows = scalar_frame->N() * scalar_frame->l();
  const int out_rows = in_rows;
  const int m = vec_frame->m();
  Mat M = Mat::Zero(vec_frame->dim(), scalar_frame->dim());
  for (int c = 0; c < in_rows; ++c) {
    for (int s = 0; s < m; ++s) {
      const Vec prod = series::mul(sym.coeffs.row(s).transpose(),
                                   scalar_frame->scalar_funcs().row(c).transpose());
      for (int r = 0; r < out_rows; ++r) {
        const cplx ip = (vec_frame->scalar_funcs().row(r).conjugate().array() *
                         prod.transpose().array()).sum();
        M(r * m + s, c) = ip;
      }
    }
  }
  return {scalar_frame, vec_frame, std::move(M), Exactness::truncation_leaky, 0.0};
}

OperatorMatrix rank_one(const WoldVector& V, const WoldVector& U) {
  if (!V.frame->compatible(*U.frame))
    throw std::invalid_argument("rank_one: frame mismatch");
  return {U.frame, V.frame, V.coords * U.coords.adjoint(), Exactness::exact, 0.0};
}

OperatorMatrix perturbed_backward(const FramePtr& frame,
                                  const std::vector<std::pair<WoldVector, WoldVector>>& pairs) {
  OperatorMatrix T = toeplitz_adjoint(frame);
  for (const auto& [V, U] : pairs) {
    if (!V.frame->compatible(*frame) || !U.frame->compatible(*frame))
      throw std::invalid_argument("perturbed_backward: frame mismatch");
    T.mat -= V.coords * U.coords.adjoint();
  }
  return T;
}

std::vector<double> c0_decay(const OperatorMatrix& T, const Subspace& M,
                             const WoldVector& h, int nmax) {
  if (!T.domain->compatible(*T.codomain) || !h.frame->compatible(*T.domain) ||
      !M.frame->compatible(*T.domain))
    throw std::invalid_argument("c0_decay: frame mismatch");
  if (nmax < 1) throw std::invalid_argument("c0_decay: nmax must be >= 1");
  const Mat Th = T.mat.adjoint();
  Vec x = h.coords;
  std::vector<double> out;
  out.reserve(nmax);
  for (int n = 0; n < nmax; ++n) {
    x = M.project_coords(Th * x);
    out.push_back(x.norm());
  }
  return out;
}

}  // namespace hardylab
