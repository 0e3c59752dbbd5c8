#include "hardylab/hardy.hpp"

#include <stdexcept>

namespace hardylab {

cplx inner(const H2Element& F, const H2Element& G) {
  if (F.m != G.m || F.coeffs.cols() != G.coeffs.cols())
    throw std::invalid_argument("inner: dimension mismatch");
  cplx acc = 0.0;
  for (int s = 0; s < F.m; ++s)
    acc += (G.coeffs.row(s).conjugate().array() * F.coeffs.row(s).array()).sum();
  return acc;
}

ModelBasis tm_basis(const BlaschkeProduct& B, int D) {
  const int l = B.degree();
  if (l < 1) throw std::invalid_argument("tm_basis: degree must be >= 1");
  if (D < l) throw std::invalid_argument("tm_basis: D < degree");
  ModelBasis mb{B, D, Mat::Zero(l, D + 1)};
  Vec prod = Vec::Zero(D + 1);
  prod[0] = 1.0;
  const auto& zs = B.zeros();
  for (int k = 0; k < l; ++k) {
    const cplx w = zs[k];
    const Vec g = series::geometric(std::conj(w), D);
    const double c = std::sqrt(1.0 - std::norm(w));
    mb.tm.row(k) = (c * series::mul(prod, g)).transpose();
    Vec num = Vec::Zero(D + 1);
    num[0] = -w;
    num[1] = 1.0;
    prod = series::mul(prod, series::mul(num, g));
  }
  return mb;
}

WoldFrame::WoldFrame(BlaschkeProduct B, int m, int N, int D, bool allow_any_fiber)
    : B_(std::move(B)), m_(m), N_(N), D_(D) {
  if (N_ < 1) throw std::invalid_argument("WoldFrame: N must be >= 1");
  if (m_ < 0 || (!allow_any_fiber && m_ < 1))
    throw std::invalid_argument("WoldFrame: bad fiber dimension");
  basis_ = tm_basis(B_, D_);
  const int l = B_.degree();
  dim_ = N_ * l * m_;
  scalar_ = Mat::Zero(N_ * l, D_ + 1);
  const Vec Bt = B_.taylor(D_);
  Vec Bp = Vec::Zero(D_ + 1);
  Bp[0] = 1.0;
  for (int n = 0; n < N_; ++n) {
    for (int j = 0; j < l; ++j)
      scalar_.row(n * l + j) = series::mul(Bp, basis_.tm.row(j).transpose()).transpose();
    Bp = series::mul(Bp, Bt);
  }
}

FramePtr frame_build(const BlaschkeProduct& B, int m, int N, int D) {
  if (!B.vanishes_at_zero())
    throw std::invalid_argument("frame_build: symbol must vanish at zero");
  if (m < 1) throw std::invalid_argument("frame_build: m must be >= 1");
  return std::make_shared<const WoldFrame>(B, m, N, D, false);
}

FramePtr concat_frames(const FramePtr& fp, const FramePtr& fm) {
  if (!fm) throw std::invalid_argument("concat_frames: null frame");
  const int p = fp ? fp->m() : 0;
  if (p == 0) return fm;
  if (!(fp->B() == fm->B()) || fp->N() != fm->N() || fp->D() != fm->D())
    throw std::invalid_argument("concat_frames: mismatched frames");
  return std::make_shared<const WoldFrame>(fm->B(), p + fm->m(), fm->N(), fm->D(), true);
}

WoldProjection to_wold(const H2Element& F, const FramePtr& frame) {
  if (F.m != frame->m() || F.D() != frame->D())
    throw std::invalid_argument("to_wold: dimension mismatch");
  const int rows = frame->N() * frame->l();
  const int m = frame->m();
  Vec coords = Vec::Zero(frame->dim());
  for (int r = 0; r < rows; ++r) {
    const auto g = frame->scalar_funcs().row(r);
    for (int s = 0; s < m; ++s)
      coords[r * m + s] = (g.conjugate().array() * F.coeffs.row(s).array()).sum();
  }
  WoldVector v{frame, coords};
  H2Element back = from_wold(v);
  const double residual = (back.coeffs - F.coeffs).norm();
  return {std::move(v), residual};
}

H2Element from_wold(const WoldVector& v) {
  const auto& fr = *v.frame;
  H2Element out{fr.m(), Mat::Zero(fr.m(), fr.D() + 1)};
  const int rows = fr.N() * fr.l();
  for (int r = 0; r < rows; ++r) {
    const auto g = fr.scalar_funcs().row(r);
    for (int s = 0; s < fr.m(); ++s) {
      const cplx c = v.coords[r * fr.m() + s];
      if (c != 0.0) out.coeffs.row(s) += c * g;
    }
  }
  return out;
}

Vec shift_down_coords(const WoldFrame& fr, const Vec& x) {
  const int lm = fr.l() * fr.m();
  Vec y = Vec::Zero(x.size());
  if (x.size() > lm) y.head(x.size() - lm) = x.tail(x.size() - lm);
  return y;
}

Vec shift_up_coords(const WoldFrame& fr, const Vec& x, double* overflow) {
  const int lm = fr.l() * fr.m();
  Vec y = Vec::Zero(x.size());
  if (x.size() > lm) y.tail(x.size() - lm) = x.head(x.size() - lm);
  if (overflow) *overflow = x.tail(std::min<Eigen::Index>(lm, x.size())).norm();
  return y;
}

WoldVector shift_down(const WoldVector& v) {
  return {v.frame, shift_down_coords(*v.frame, v.coords)};
}

std::pair<WoldVector, double> shift_up(const WoldVector& v) {
  double ov = 0.0;
  Vec y = shift_up_coords(*v.frame, v.coords, &ov);
  return {WoldVector{v.frame, std::move(y)}, ov};
}

}  // namespace hardylab
