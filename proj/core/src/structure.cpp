#include "hardylab/structure.hpp"

#include <algorithm>
#include <cmath>

namespace hardylab {

namespace {

Mat proj_mat(const Subspace& S) {
  return S.onb * S.onb.adjoint();
}

Mat complement_apply(const Subspace& S, const Mat& X) {
  // (I - P_S) X without forming the projector
  return X - S.onb * (S.onb.adjoint() * X);
}

// columns of (I - P_S) M.onb, orthonormalized against the unit scale
Subspace part_outside(const Subspace& M, const Subspace& S, double rank_tol) {
  std::vector<Vec> vs;
  vs.reserve(M.dim());
  for (int c = 0; c < M.dim(); ++c) {
    Vec v = M.onb.col(c);
    vs.push_back(v - S.project_coords(v));
  }
  return orthonormalize(M.frame, vs, rank_tol, 1.0);
}

FramePtr fiber_frame(const FramePtr& like, int fiber) {
  if (fiber == 0) return nullptr;
  return std::make_shared<const WoldFrame>(like->B(), fiber, like->N(), like->D(), true);
}

}  // namespace

double op_norm(const Mat& M) {
  if (M.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(M);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

Subspace model_projection(const FramePtr& frame, const BlaschkeProduct& Bp) {
  const ModelBasis mb = tm_basis(Bp, frame->D());
  const int lp = Bp.degree();
  const int l = frame->l();
  const int m = frame->m();
  const int rows = frame->N() * l;
  std::vector<Vec> vs;
  for (int k = 0; k < lp; ++k) {
    Vec scal(rows);
    for (int r = 0; r < rows; ++r)
      scal[r] = (frame->scalar_funcs().row(r).conjugate().array() *
                 mb.tm.row(k).array()).sum();
    for (int s = 0; s < m; ++s) {
      Vec v = Vec::Zero(frame->dim());
      for (int r = 0; r < rows; ++r) v[r * m + s] = scal[r];
      vs.push_back(std::move(v));
    }
  }
  return orthonormalize(frame, vs, 1e-8, 1.0);
}

Subspace intersect_multiplier_range(const Subspace& M, const BlaschkeProduct& Bp,
                                    double eps) {
  const ModelBasis mb = tm_basis(Bp, M.frame->D());
  const int lp = Bp.degree();
  const int l = M.frame->l();
  const int m = M.frame->m();
  const int rows = M.frame->N() * l;
  // constraint matrix: row (k,s), column c = inner product of M basis column c
  // against the projected model function; kernel = the intersection
  Mat A(lp * m, M.dim());
  for (int k = 0; k < lp; ++k) {
    Vec scal(rows);
    for (int r = 0; r < rows; ++r)
      scal[r] = (M.frame->scalar_funcs().row(r).conjugate().array() *
                 mb.tm.row(k).array()).sum();
    for (int s = 0; s < m; ++s) {
      Vec kv = Vec::Zero(M.frame->dim());
      for (int r = 0; r < rows; ++r) kv[r * m + s] = scal[r];
      A.row(k * m + s) = kv.adjoint() * M.onb;
    }
  }
  if (M.dim() == 0) return Subspace{M.frame, Mat(M.frame->dim(), 0), M.rank_tol};
  Eigen::JacobiSVD<Mat> svd(A, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cut = eps * std::max(sv.size() ? sv[0] : 0.0, 1.0);
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++r;
  const int kdim = M.dim() - r;
  return Subspace{M.frame, M.onb * svd.matrixV().rightCols(kdim), M.rank_tol};
}

// --- invariant subspace decomposition -------------------------------------

namespace {

// shared recursion core: A_n against the wandering basis W (inside M),
// optional defect basis Jb applied after the shift, X = the subspace whose
// projection precedes the shift
struct RecursionOut {
  std::vector<ElementDecomposition> elements;
  double max_terminal = 0.0;
};

// standard variant used by decompose_thm32: X = M ominus W, H-blocks recorded
RecursionOut run_recursion_32(const Subspace& M, const Mat& W) {
  const auto& fr = *M.frame;
  const int p = static_cast<int>(W.cols());
  const int N = fr.N();
  const int lm = fr.l() * fr.m();
  RecursionOut out;
  for (int c = 0; c < M.dim(); ++c) {
    ElementDecomposition el;
    el.A = Mat::Zero(p, N);
    el.Hblocks = Mat::Zero(lm, N);
    Vec L = M.onb.col(c);
    const double f0 = L.norm();
    for (int n = 0; n < N; ++n) {
      el.iterate_norms.push_back(L.norm());
      el.A.col(n) = W.adjoint() * L;
      Vec F1 = M.project_coords(L) - W * (W.adjoint() * L);
      el.Hblocks.col(n) = F1.head(lm);
      L = shift_down_coords(fr, F1);
    }
    el.iterate_norms.push_back(L.norm());
    el.terminal_ratio = L.norm() / std::max(f0, 1e-300);
    out.max_terminal = std::max(out.max_terminal, el.terminal_ratio);
    out.elements.push_back(std::move(el));
  }
  return out;
}

Vec rebuild_element_32(const WoldFrame& fr, const Mat& W, const ElementDecomposition& el) {
  const int N = fr.N();
  const int lm = fr.l() * fr.m();
  Vec out = Vec::Zero(fr.dim());
  for (int n = 0; n < N; ++n) {
    Vec term = Vec::Zero(fr.dim());
    if (W.cols() > 0) term = W * el.A.col(n);
    term.head(lm) += el.Hblocks.col(n);
    for (int k = 0; k < n; ++k) term = shift_up_coords(fr, term);
    out += term;
  }
  return out;
}

}  // namespace

DecompositionResult decompose_thm32(const Subspace& M,
                                    const std::vector<WoldVector>& Us,
                                    const std::vector<WoldVector>& Vs, double tol) {
  if (Us.size() != Vs.size())
    throw std::invalid_argument("decompose_thm32: U/V count mismatch");
  const FramePtr frame = M.frame;
  const auto& fr = *frame;
  std::vector<std::pair<WoldVector, WoldVector>> pairs;
  for (size_t i = 0; i < Us.size(); ++i) pairs.emplace_back(Vs[i], Us[i]);
  const OperatorMatrix T = perturbed_backward(frame, pairs);

  DecompositionResult res;
  res.invariance_residual = op_norm(complement_apply(M, T.mat * M.onb));
  if (!(res.invariance_residual <= tol))
    throw HypothesisError("invariance",
                          "decompose_thm32: M is not invariant under the perturbed operator");

  // wandering space W = span of the projections of the U's into M
  double uscale = 1.0;
  for (const auto& u : Us) uscale = std::max(uscale, u.coords.norm());
  std::vector<Vec> pu;
  for (const auto& u : Us) pu.push_back(M.project_coords(u.coords));
  Subspace W = orthonormalize(frame, pu, 1e-10, uscale);
  res.p = W.dim();
  for (int i = 0; i < res.p; ++i)
    res.G.push_back(WoldVector{frame, W.onb.col(i)});

  RecursionOut rec = run_recursion_32(M, W.onb);
  res.max_terminal_ratio = rec.max_terminal;

  // tuples (R, H) in the fiber p+m frame
  const int p = res.p, m = fr.m(), l = fr.l(), N = fr.N();
  res.concat = concat_frames(fiber_frame(frame, p), frame);
  const int pm = p + m;
  std::vector<Vec> tuples;
  for (auto& el : rec.elements) {
    Vec t = Vec::Zero(res.concat->dim());
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < p; ++i) t[(n * l + 0) * pm + i] = el.A(i, n);
      for (int j = 0; j < l; ++j)
        for (int s = 0; s < m; ++s)
          t[(n * l + j) * pm + p + s] = el.Hblocks(j * m + s, n);
    }
    tuples.push_back(std::move(t));
  }

  // per-element diagnostics
  for (int c = 0; c < M.dim(); ++c) {
    auto& el = rec.elements[c];
    const Vec back = rebuild_element_32(fr, W.onb, el);
    el.reconstruction_residual = (back - M.onb.col(c)).norm();
    const double n2 = el.A.squaredNorm() + el.Hblocks.squaredNorm();
    el.parseval_gap = std::abs(M.onb.col(c).squaredNorm() - n2);
    res.reconstruction_residual = std::max(res.reconstruction_residual, el.reconstruction_residual);
    res.parseval_gap = std::max(res.parseval_gap, el.parseval_gap);
  }

  // isometry of (R,H) -> GR + H against the Gram matrix of the inputs
  for (size_t a = 0; a < tuples.size(); ++a)
    for (size_t b = 0; b < tuples.size(); ++b) {
      const cplx g = tuples[b].dot(tuples[a]);
      const cplx want = (a == b) ? 1.0 : 0.0;
      res.isometry_residual = std::max(res.isometry_residual, std::abs(g - want));
    }

  res.K = orthonormalize(res.concat, tuples, 1e-10, 1.0);

  // left-shift invariance of K and the j = 1 support of the wandering part
  for (const Vec& t : tuples) {
    const Vec st = shift_down_coords(*res.concat, t);
    res.k_invariance_residual = std::max(res.k_invariance_residual,
                                         (st - res.K.project_coords(st)).norm());
  }
  for (int c = 0; c < res.K.dim(); ++c) {
    double off = 0.0;
    for (int n = 0; n < N; ++n)
      for (int j = 1; j < l; ++j)
        for (int i = 0; i < p; ++i)
          off += std::norm(res.K.onb.col(c)[(n * l + j) * pm + i]);
    res.r_support_residual = std::max(res.r_support_residual, std::sqrt(off));
  }

  res.elements = std::move(rec.elements);
  return res;
}

CanonicalReport verify_canonical_conditions(const DecompositionResult& res,
                                            const Subspace& M, double tol) {
  CanonicalReport rep;
  const auto& fr = *M.frame;
  const int p = res.p;
  const int N = fr.N();
  const int lm = fr.l() * fr.m();
  Mat W(fr.dim(), p);
  for (int i = 0; i < p; ++i) W.col(i) = res.G[i].coords;
  for (int c = 0; c < M.dim(); ++c) {
    const auto& el = res.elements[c];
    Vec L = M.onb.col(c);
    for (int n = 0; n < N; ++n) {
      const Vec pw = W * (W.adjoint() * L);
      rep.c1 = std::max(rep.c1, (pw - W * el.A.col(n)).norm());
      const Vec F1 = M.project_coords(L) - pw;
      rep.c2 = std::max(rep.c2, (F1.head(lm) - el.Hblocks.col(n)).norm());
      L = shift_down_coords(fr, F1);
    }
    rep.c3 = std::max(rep.c3, el.parseval_gap);
  }
  // the representation is pinned: tampering with one coefficient must break
  // the wandering-coefficient identity by about the tamper size
  if (M.dim() > 0 && p > 0) {
    const auto& el = res.elements[0];
    Vec L = M.onb.col(0);
    Vec a0 = el.A.col(0);
    a0[0] += 1e-3;
    rep.uniqueness_margin = (W * (W.adjoint() * L) - W * a0).norm() - rep.c1;
  } else {
    rep.uniqueness_margin = 1e-3;  // nothing to tamper with in the p = 0 branch
  }
  rep.pass = rep.c1 <= tol && rep.c2 <= tol && rep.c3 <= tol &&
             rep.uniqueness_margin >= 1e-4;
  return rep;
}

namespace {

// image of a fiber p+m tuple under (R, H) -> GR + H, in the m-fiber frame
Vec tuple_image(const WoldFrame& fr, const Mat& G, const Vec& t, int p) {
  const int l = fr.l(), m = fr.m(), N = fr.N();
  const int pm = p + m;
  Vec out = Vec::Zero(fr.dim());
  for (int n = 0; n < N; ++n) {
    Vec term = Vec::Zero(fr.dim());
    if (p > 0) {
      Vec a(p);
      for (int i = 0; i < p; ++i) a[i] = t[(n * l + 0) * pm + i];
      term = G * a;
    }
    for (int j = 0; j < l; ++j)
      for (int s = 0; s < m; ++s)
        term[j * m + s] += t[(n * l + j) * pm + p + s];
    for (int k = 0; k < n; ++k) term = shift_up_coords(fr, term);
    out += term;
  }
  return out;
}

double tuple_support_residual(const WoldFrame& concat, const Mat& K, int p) {
  const int l = concat.l(), N = concat.N();
  const int pm = concat.m();
  double worst = 0.0;
  for (int c = 0; c < K.cols(); ++c) {
    double off = 0.0;
    for (int n = 0; n < N; ++n)
      for (int j = 1; j < l; ++j)
        for (int i = 0; i < p; ++i)
          off += std::norm(K((n * l + j) * pm + i, c));
    worst = std::max(worst, std::sqrt(off));
  }
  return worst;
}

}  // namespace

double check_thm36_converse(const std::vector<WoldVector>& G, const Subspace& K,
                            const Subspace& M, double tol) {
  const FramePtr frame = M.frame;
  const auto& fr = *frame;
  const int p = static_cast<int>(G.size());
  const auto& concat = *K.frame;
  if (concat.m() != p + fr.m() || !(concat.B() == fr.B()) || concat.N() != fr.N())
    throw std::invalid_argument("check_thm36_converse: frame mismatch");
  Mat Gm(fr.dim(), p);
  for (int i = 0; i < p; ++i) Gm.col(i) = G[i].coords;

  if (tuple_support_residual(concat, K.onb, p) > tol)
    throw HypothesisError("j1-support", "wandering part of K is not composed with the symbol");
  for (int c = 0; c < K.dim(); ++c) {
    const Vec st = shift_down_coords(concat, K.onb.col(c));
    if ((st - K.project_coords(st)).norm() > tol)
      throw HypothesisError("K-invariance", "K is not invariant under the block left shift");
  }
  // isometric onto M
  if (K.dim() != M.dim())
    throw HypothesisError("isometry", "K and M have different dimensions");
  Mat images(fr.dim(), K.dim());
  for (int c = 0; c < K.dim(); ++c)
    images.col(c) = tuple_image(fr, Gm, K.onb.col(c), p);
  Mat gram = images.adjoint() * images;
  if ((gram - Mat::Identity(K.dim(), K.dim())).norm() > tol * std::max(1, K.dim()))
    throw HypothesisError("isometry", "the defining map is not isometric");
  for (int c = 0; c < K.dim(); ++c) {
    const Vec img = images.col(c);
    if ((img - M.project_coords(img)).norm() > tol)
      throw HypothesisError("isometry", "the defining map does not land in M");
  }

  std::vector<std::pair<WoldVector, WoldVector>> pairs;
  for (int i = 0; i < p; ++i)
    pairs.emplace_back(WoldVector{frame, shift_down_coords(fr, Gm.col(i))},
                       WoldVector{frame, Gm.col(i)});
  const OperatorMatrix T = perturbed_backward(frame, pairs);
  return op_norm(complement_apply(M, T.mat * M.onb));
}

Thm37Result forward_thm37(const Subspace& M, const std::vector<WoldVector>& Us,
                          const std::vector<WoldVector>& Vs, double tol) {
  const FramePtr frame = M.frame;
  OperatorMatrix Tf = toeplitz_forward(frame);
  for (size_t i = 0; i < Us.size(); ++i)
    Tf.mat -= Vs[i].coords * Us[i].coords.adjoint();
  Thm37Result out;
  out.forward_invariance_residual = op_norm(complement_apply(M, Tf.mat * M.onb));
  if (!(out.forward_invariance_residual <= tol))
    throw HypothesisError("forward-invariance",
                          "forward_thm37: M is not invariant under the perturbed operator");
  Subspace Mp = complement(M);
  out.inner = decompose_thm32(Mp, Vs, Us, tol);
  out.p = out.inner.p;
  out.G = out.inner.G;
  out.unitary_residual = out.inner.isometry_residual;
  out.Nspace = complement(out.inner.K);
  const OperatorMatrix Sf = toeplitz_forward(out.inner.concat);
  out.n_invariance_residual =
      op_norm(complement_apply(out.Nspace, Sf.mat * out.Nspace.onb));
  return out;
}

bool membership_via_model(const WoldVector& F, const std::vector<WoldVector>& Fs,
                          const Subspace& Nspace, double tol) {
  const FramePtr frame = F.frame;
  const auto& fr = *frame;
  const int p = static_cast<int>(Fs.size());
  const auto& concat = *Nspace.frame;
  if (concat.m() != p + fr.m())
    throw std::invalid_argument("membership_via_model: frame mismatch");
  const FramePtr scal = std::make_shared<const WoldFrame>(fr.B(), 1, fr.N(), fr.D(), true);
  const int l = fr.l(), m = fr.m(), N = fr.N();
  const int pm = p + m;
  Vec t = Vec::Zero(concat.dim());
  for (int i = 0; i < p; ++i) {
    const OperatorMatrix Ti = vector_multiplier(from_wold(Fs[i]), scal, frame);
    const Vec ri = Ti.mat.adjoint() * F.coords;  // scalar-frame coordinates
    for (int r = 0; r < N * l; ++r) t[r * pm + i] = ri[r];
  }
  for (int r = 0; r < N * l; ++r)
    for (int s = 0; s < m; ++s) t[r * pm + p + s] = F.coords[r * m + s];
  const double res = (t - Nspace.project_coords(t)).norm();
  return res <= tol * std::max(1.0, t.norm());
}

DefectReport almost_defect(const OperatorMatrix& T, const Subspace& M,
                           double rank_tol) {
  if (!T.domain->compatible(*M.frame) || !T.codomain->compatible(*M.frame))
    throw std::invalid_argument("almost_defect: frame mismatch");
  DefectReport rep;
  if (M.dim() == 0) return rep;
  const Mat Dm = complement_apply(M, T.mat * M.onb);
  Eigen::JacobiSVD<Mat> svd(Dm, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = rank_tol * std::max(sv.size() ? sv[0] : 0.0, 1.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rep.defect;
  Mat basis = svd.matrixU().leftCols(rep.defect);
  for (int i = 0; i < rep.defect; ++i)
    rep.basis.push_back(WoldVector{M.frame, basis.col(i)});
  // residual against M + defect span
  Mat rem = Dm - basis * (basis.adjoint() * Dm);
  rep.residual = op_norm(rem);
  return rep;
}

AlmostEquivReport almost_equiv_check(const OperatorMatrix& T, const Subspace& M,
                                     const std::vector<std::pair<WoldVector, WoldVector>>& pairs,
                                     double tol) {
  AlmostEquivReport rep;
  rep.k = static_cast<int>(pairs.size());
  Mat P = T.mat;
  for (const auto& [v, u] : pairs) P -= v.coords * u.coords.adjoint();
  rep.dir_a_invariance = op_norm(complement_apply(M, P * M.onb));
  DefectReport d = almost_defect(T, M, 1e-10);
  rep.defect = d.defect;
  Mat Q = T.mat;
  for (const auto& f : d.basis)
    Q -= f.coords * (T.mat.adjoint() * f.coords).adjoint();
  rep.dir_b_residual = op_norm(complement_apply(M, Q * M.onb));
  const bool dir_a_ok = !(rep.dir_a_invariance <= tol) || rep.defect <= rep.k;
  rep.pass = dir_a_ok && rep.dir_b_residual <= tol;
  return rep;
}

Thm310Result almost_decompose_thm310(const Subspace& M, double tol) {
  const FramePtr frame = M.frame;
  Thm310Result out;
  out.defect = almost_defect(toeplitz_adjoint(frame), M, 1e-10);
  std::vector<WoldVector> Us, Vs;
  for (const auto& f : out.defect.basis) {
    Us.push_back(shift_up(f).first);
    Vs.push_back(f);
  }
  out.dec = decompose_thm32(M, Us, Vs, tol);
  return out;
}

WanderingBound wandering_bound_lemma39(const Subspace& M, const BlaschkeProduct& Bp,
                                       double /*tol*/) {
  const Subspace X = intersect_multiplier_range(M, Bp);
  return WanderingBound{M.dim() - X.dim(), Bp.degree() * M.frame->m()};
}

NearlyReport nearly_check(const Subspace& M, const BlaschkeProduct& Bp, double tol) {
  NearlyReport rep;
  rep.intersection = intersect_multiplier_range(M, Bp);
  const Mat T = toeplitz_adjoint(M.frame).mat;
  rep.residual = op_norm(complement_apply(M, T * rep.intersection.onb));
  rep.ok = rep.residual <= tol;
  return rep;
}

Thm313Result nearly_decompose_thm313(const Subspace& M, const BlaschkeProduct& Bp,
                                     double tol) {
  const FramePtr frame = M.frame;
  const auto& fr = *frame;
  if (!fr.B().divides(Bp))
    throw HypothesisError("divisibility", "nearly_decompose_thm313: the frame symbol must divide Bp");
  if (!fr.B().vanishes_at_zero())
    throw HypothesisError("vanishing-at-zero", "nearly_decompose_thm313: symbol must vanish at 0");
  NearlyReport nr = nearly_check(M, Bp, tol);
  if (!nr.ok)
    throw HypothesisError("nearly-invariance", "nearly_decompose_thm313: M is not nearly invariant");

  Thm313Result out;
  out.nearly_residual = nr.residual;
  Subspace W = part_outside(M, nr.intersection, 1e-8);
  out.p = W.dim();
  std::vector<WoldVector> G, TG;
  for (int i = 0; i < out.p; ++i) {
    G.push_back(WoldVector{frame, W.onb.col(i)});
    TG.push_back(WoldVector{frame, shift_down_coords(fr, W.onb.col(i))});
  }
  out.G = G;
  out.dec = decompose_thm32(M, G, TG, tol);
  for (const auto& el : out.dec.elements)
    out.h_residual = std::max(out.h_residual, el.Hblocks.norm());

  const int p = out.p, l = fr.l(), N = fr.N();
  out.pframe = fiber_frame(frame, p);
  if (p == 0) {
    out.Nsub = Subspace{frame, Mat(fr.dim(), 0), 1e-10};
    return out;
  }
  std::vector<Vec> rparts;
  for (const auto& el : out.dec.elements) {
    Vec t = Vec::Zero(out.pframe->dim());
    for (int n = 0; n < N; ++n)
      for (int i = 0; i < p; ++i) t[(n * l + 0) * p + i] = el.A(i, n);
    rparts.push_back(std::move(t));
  }
  for (size_t a = 0; a < rparts.size(); ++a)
    for (size_t b = 0; b < rparts.size(); ++b) {
      const cplx g = rparts[b].dot(rparts[a]);
      const cplx want = (a == b) ? 1.0 : 0.0;
      out.unitary_residual = std::max(out.unitary_residual, std::abs(g - want));
    }
  out.Nsub = orthonormalize(out.pframe, rparts, 1e-10, 1.0);
  for (const Vec& t : rparts) {
    const Vec st = shift_down_coords(*out.pframe, t);
    out.n_invariance_residual = std::max(out.n_invariance_residual,
                                         (st - out.Nsub.project_coords(st)).norm());
  }
  return out;
}

NearlyDefectResult nearly_defect_decompose(const Subspace& M, const BlaschkeProduct& Bp,
                                           double tol) {
  const FramePtr frame = M.frame;
  const auto& fr = *frame;
  if (!fr.B().divides(Bp))
    throw HypothesisError("divisibility", "nearly_defect_decompose: the frame symbol must divide Bp");
  if (!fr.B().vanishes_at_zero())
    throw HypothesisError("vanishing-at-zero", "nearly_defect_decompose: symbol must vanish at 0");
  NearlyDefectResult out;
  const Subspace X = intersect_multiplier_range(M, Bp);
  const Mat T = toeplitz_adjoint(frame).mat;

  // defect space of the nearly-invariance relation
  Mat Dm = complement_apply(M, T * X.onb);
  Eigen::JacobiSVD<Mat> svd(Dm, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double cut = 1e-10 * std::max(sv.size() ? sv[0] : 0.0, 1.0);
  int ndef = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++ndef;
  out.defect = ndef;
  Mat Jb = svd.matrixU().leftCols(ndef);
  for (int i = 0; i < ndef; ++i) out.Js.push_back(WoldVector{frame, Jb.col(i)});
  out.nearly_residual = op_norm(Dm - Jb * (Jb.adjoint() * Dm));
  if (!(out.nearly_residual <= tol))
    throw HypothesisError("nearly-defect",
                          "nearly_defect_decompose: image does not fit in M plus a finite defect");

  Subspace W = part_outside(M, X, 1e-8);
  out.p = W.dim();
  out.contained = (out.p == 0);
  for (int i = 0; i < out.p; ++i) out.G.push_back(WoldVector{frame, W.onb.col(i)});

  const int p = out.p, l = fr.l(), N = fr.N();
  const int q = p + ndef;
  if (q == 0)
    throw HypothesisError("degenerate", "nearly_defect_decompose: nothing to represent");
  out.concat = fiber_frame(frame, q);

  std::vector<Vec> tuples;
  for (int c = 0; c < M.dim(); ++c) {
    ElementDecomposition el;
    el.A = Mat::Zero(p, N);
    el.alpha = Mat::Zero(ndef, N);
    Vec L = M.onb.col(c);
    const double f0 = L.norm();
    for (int n = 0; n < N; ++n) {
      el.iterate_norms.push_back(L.norm());
      el.A.col(n) = W.onb.adjoint() * L;
      const Vec Y = shift_down_coords(fr, X.project_coords(L));
      el.alpha.col(n) = Jb.adjoint() * Y;
      L = Y - Jb * el.alpha.col(n);
    }
    el.iterate_norms.push_back(L.norm());
    el.terminal_ratio = L.norm() / std::max(f0, 1e-300);
    out.max_terminal_ratio = std::max(out.max_terminal_ratio, el.terminal_ratio);

    // rebuild: sum_n B^n G A_n + sum_n B^{n+1} J alpha_n
    Vec back = Vec::Zero(fr.dim());
    for (int n = 0; n < N; ++n) {
      Vec tg = (p > 0) ? Vec(W.onb * el.A.col(n)) : Vec(Vec::Zero(fr.dim()));
      for (int k = 0; k < n; ++k) tg = shift_up_coords(fr, tg);
      Vec tj = Jb * el.alpha.col(n);
      for (int k = 0; k < n + 1; ++k) tj = shift_up_coords(fr, tj);
      back += tg + tj;
    }
    el.reconstruction_residual = (back - M.onb.col(c)).norm();
    el.parseval_gap = std::abs(M.onb.col(c).squaredNorm() -
                               el.A.squaredNorm() - el.alpha.squaredNorm());
    out.reconstruction_residual = std::max(out.reconstruction_residual, el.reconstruction_residual);
    out.norm_gap = std::max(out.norm_gap, el.parseval_gap);

    Vec t = Vec::Zero(out.concat->dim());
    for (int n = 0; n < N; ++n) {
      for (int i = 0; i < p; ++i) t[(n * l + 0) * q + i] = el.A(i, n);
      for (int i = 0; i < ndef; ++i) t[(n * l + 0) * q + p + i] = el.alpha(i, n);
    }
    tuples.push_back(std::move(t));
    out.elements.push_back(std::move(el));
  }

  for (size_t a = 0; a < tuples.size(); ++a)
    for (size_t b = 0; b < tuples.size(); ++b) {
      const cplx g = tuples[b].dot(tuples[a]);
      const cplx want = (a == b) ? 1.0 : 0.0;
      out.isometry_residual = std::max(out.isometry_residual, std::abs(g - want));
    }
  out.K = orthonormalize(out.concat, tuples, 1e-10, 1.0);
  for (const Vec& t : tuples) {
    const Vec st = shift_down_coords(*out.concat, t);
    out.k_invariance_residual = std::max(out.k_invariance_residual,
                                         (st - out.K.project_coords(st)).norm());
  }
  return out;
}

NearlyConverseReport nearly_defect_converse(const std::vector<WoldVector>& G,
                                            const Subspace& K,
                                            const std::vector<WoldVector>& Js,
                                            const BlaschkeProduct& Bp, double tol) {
  const int p = static_cast<int>(G.size());
  const int n = static_cast<int>(Js.size());
  if (p + n == 0) throw std::invalid_argument("nearly_defect_converse: empty representation");
  const FramePtr frame = (p > 0) ? G.front().frame : Js.front().frame;
  const auto& fr = *frame;
  const auto& concat = *K.frame;
  if (concat.m() != p + n || !(concat.B() == fr.B()) || concat.N() != fr.N())
    throw std::invalid_argument("nearly_defect_converse: frame mismatch");
  if (!fr.B().divides(Bp))
    throw HypothesisError("divisibility", "nearly_defect_converse: the frame symbol must divide Bp");

  // support and shift-invariance hypotheses on K
  const int l = fr.l(), N = fr.N(), q = p + n;
  for (int c = 0; c < K.dim(); ++c) {
    double off = 0.0;
    for (int b = 0; b < N; ++b)
      for (int j = 1; j < l; ++j)
        for (int i = 0; i < q; ++i)
          off += std::norm(K.onb.col(c)[(b * l + j) * q + i]);
    if (std::sqrt(off) > tol)
      throw HypothesisError("j1-support", "K is not composed with the symbol");
    const Vec st = shift_down_coords(concat, K.onb.col(c));
    if ((st - K.project_coords(st)).norm() > tol)
      throw HypothesisError("K-invariance", "K is not invariant under the block left shift");
  }

  Mat Gm(fr.dim(), p), Jm(fr.dim(), n);
  for (int i = 0; i < p; ++i) Gm.col(i) = G[i].coords;
  for (int i = 0; i < n; ++i) Jm.col(i) = Js[i].coords;

  // synthesize M from the representation
  Mat images(fr.dim(), K.dim());
  for (int c = 0; c < K.dim(); ++c) {
    Vec out = Vec::Zero(fr.dim());
    for (int b = 0; b < N; ++b) {
      Vec a(p), al(n);
      for (int i = 0; i < p; ++i) a[i] = K.onb.col(c)[(b * l + 0) * q + i];
      for (int i = 0; i < n; ++i) al[i] = K.onb.col(c)[(b * l + 0) * q + p + i];
      Vec tg = (p > 0) ? Vec(Gm * a) : Vec(Vec::Zero(fr.dim()));
      for (int k = 0; k < b; ++k) tg = shift_up_coords(fr, tg);
      Vec tj = (n > 0) ? Vec(Jm * al) : Vec(Vec::Zero(fr.dim()));
      for (int k = 0; k < b + 1; ++k) tj = shift_up_coords(fr, tj);
      out += tg + tj;
    }
    images.col(c) = out;
  }
  Mat gram = images.adjoint() * images;
  if ((gram - Mat::Identity(K.dim(), K.dim())).norm() > tol * std::max(1, K.dim()))
    throw HypothesisError("isometry", "the defining map is not isometric");

  std::vector<Vec> mcols;
  for (int c = 0; c < K.dim(); ++c) mcols.push_back(images.col(c));
  const Subspace M = orthonormalize(frame, mcols, 1e-10, 1.0);
  const Subspace X = intersect_multiplier_range(M, Bp);
  const Mat T = toeplitz_adjoint(frame).mat;

  std::vector<Vec> mj = mcols;
  for (int i = 0; i < n; ++i) mj.push_back(Jm.col(i));
  const Subspace MJ = orthonormalize(frame, mj, 1e-10, 1.0);

  NearlyConverseReport rep;
  rep.residual = op_norm(complement_apply(MJ, T * X.onb));
  Mat Dm = complement_apply(M, T * X.onb);
  Eigen::JacobiSVD<Mat> svd(Dm);
  const auto& sv = svd.singularValues();
  const double cut = 1e-8 * std::max(sv.size() ? sv[0] : 0.0, 1.0);
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > cut) ++rep.defect;
  rep.pass = rep.residual <= tol && rep.defect <= n;
  return rep;
}

}  // namespace hardylab
