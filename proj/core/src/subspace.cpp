#include "hardylab/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hardylab/operators.hpp"

namespace hardylab {

namespace {

void check_common_frame(const FramePtr& frame, const std::vector<WoldVector>& vs) {
  for (const auto& v : vs)
    if (!v.frame->compatible(*frame))
      throw std::invalid_argument("mixed frames");
}

}  // namespace

Subspace orthonormalize(const FramePtr& frame, const std::vector<Vec>& vectors,
                        double rank_tol, double scale) {
  // a null frame is allowed for frame-agnostic use; the dimension then comes
  // from the vectors themselves
  const int dim = frame ? frame->dim()
                        : (vectors.empty() ? 0 : static_cast<int>(vectors.front().size()));
  double mx = scale;
  if (mx < 0.0) {
    mx = 0.0;
    for (const Vec& v : vectors) mx = std::max(mx, v.norm());
  }
  const double cut = rank_tol * std::max(mx, 1e-300);
  Mat Q(dim, vectors.size());
  int k = 0;
  for (const Vec& v : vectors) {
    if (v.size() != dim) throw std::invalid_argument("orthonormalize: bad length");
    Vec w = v;
    for (int pass = 0; pass < 2; ++pass)
      if (k > 0) w -= Q.leftCols(k) * (Q.leftCols(k).adjoint() * w);
    const double nw = w.norm();
    if (nw > cut) Q.col(k++) = w / nw;
  }
  return Subspace{frame, Q.leftCols(k), rank_tol};
}

Subspace orthonormalize(const std::vector<WoldVector>& vectors,
                        double rank_tol, double scale) {
  if (vectors.empty())
    throw std::invalid_argument("orthonormalize: empty input needs a frame");
  check_common_frame(vectors.front().frame, vectors);
  std::vector<Vec> vs;
  vs.reserve(vectors.size());
  for (const auto& v : vectors) vs.push_back(v.coords);
  return orthonormalize(vectors.front().frame, vs, rank_tol, scale);
}

WoldVector project(const Subspace& S, const WoldVector& v) {
  if (!v.frame->compatible(*S.frame))
    throw std::invalid_argument("project: frame mismatch");
  return {S.frame, S.project_coords(v.coords)};
}

Subspace complement(const Subspace& S) {
  const int dim = S.frame->dim();
  const int r = S.dim();
  if (r == 0) return Subspace{S.frame, Mat::Identity(dim, dim), S.rank_tol};
  // trailing columns of a full unitary extending the basis; exact to
  // rounding, unlike orthonormalizing projected unit vectors
  Eigen::HouseholderQR<Mat> qr(S.onb);
  const Mat Q = qr.householderQ();
  return Subspace{S.frame, Q.rightCols(dim - r), S.rank_tol};
}

Subspace intersect(const Subspace& S1, const Subspace& S2, double eps) {
  if (!S1.frame->compatible(*S2.frame))
    throw std::invalid_argument("intersect: frame mismatch");
  if (S1.dim() == 0 || S2.dim() == 0) return Subspace{S1.frame, Mat(S1.frame->dim(), 0), S1.rank_tol};
  Mat C = S1.onb.adjoint() * S2.onb;
  Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullU);
  int k = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] >= 1.0 - eps) ++k;
  std::vector<Vec> vs;
  for (int i = 0; i < k; ++i) vs.push_back(S1.onb * svd.matrixU().col(i));
  Subspace out = orthonormalize(S1.frame, vs, 1e-12, 1.0);
  return out;
}

Subspace ominus(const Subspace& M, const Subspace& S, double eps) {
  return intersect(M, complement(S), eps);
}

Subspace span_union(const Subspace& S1, const Subspace& S2) {
  if (!S1.frame->compatible(*S2.frame))
    throw std::invalid_argument("span_union: frame mismatch");
  std::vector<Vec> vs;
  for (int i = 0; i < S1.dim(); ++i) vs.push_back(S1.onb.col(i));
  for (int i = 0; i < S2.dim(); ++i) vs.push_back(S2.onb.col(i));
  return orthonormalize(S1.frame, vs, S1.rank_tol, 1.0);
}

std::vector<double> principal_angles(const Subspace& S1, const Subspace& S2) {
  if (!S1.frame->compatible(*S2.frame))
    throw std::invalid_argument("principal_angles: frame mismatch");
  Mat C = S1.onb.adjoint() * S2.onb;
  Eigen::JacobiSVD<Mat> svd(C);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    out.push_back(std::acos(std::clamp(svd.singularValues()[i], 0.0, 1.0)));
  return out;
}

Subspace krylov_closure(const std::vector<const OperatorMatrix*>& ops,
                        const std::vector<WoldVector>& seeds,
                        double rank_tol) {
  if (seeds.empty()) throw std::invalid_argument("krylov_closure: no seeds");
  const FramePtr frame = seeds.front().frame;
  check_common_frame(frame, seeds);
  for (const auto* op : ops)
    if (!op->domain->compatible(*frame) || !op->codomain->compatible(*frame))
      throw std::invalid_argument("krylov_closure: operator is not an endomorphism");
  double scale = 0.0;
  for (const auto& s : seeds) scale = std::max(scale, s.coords.norm());
  std::vector<Vec> all;
  for (const auto& s : seeds) all.push_back(s.coords);
  Subspace S = orthonormalize(frame, all, rank_tol, scale);
  for (int round = 0; round <= frame->dim(); ++round) {
    std::vector<Vec> next = all;
    bool grew = false;
    for (const auto* op : ops)
      for (int c = 0; c < S.dim(); ++c) next.push_back(op->mat * S.onb.col(c));
    Subspace S2 = orthonormalize(frame, next, rank_tol, 1.0);
    if (S2.dim() == S.dim()) break;
    grew = S2.dim() > S.dim();
    S = std::move(S2);
    all = std::move(next);
    if (!grew) break;
  }
  return S;
}

}  // namespace hardylab
