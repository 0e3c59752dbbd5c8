#include "hardylab/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

namespace hardylab::lab {

using json = nlohmann::ordered_json;

// --- serialization helpers ------------------------------------------------

json json_complex(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

json json_vec(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_complex(v[i]));
  return out;
}

Vec vec_from_json(const nlohmann::json& j) {
  Vec v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = complex_from_json(j[i]);
  return v;
}

json json_mat(const Mat& M) {
  json data = json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c) data.push_back(json_complex(M(r, c)));
  return json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", data}};
}

Mat mat_from_json(const nlohmann::json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  Mat M(rows, cols);
  const auto& data = j.at("data");
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c)
      M(r, c) = complex_from_json(data.at(static_cast<size_t>(r * cols + c)));
  return M;
}

namespace {

json json_zeros(const BlaschkeProduct& B) {
  json out = json::array();
  for (const cplx& w : B.zeros()) out.push_back(json_complex(w));
  return out;
}

BlaschkeProduct zeros_from_json(const nlohmann::json& j) {
  std::vector<cplx> zs;
  for (const auto& e : j) zs.push_back(complex_from_json(e));
  return BlaschkeProduct(zs);
}

json json_vec_list(const std::vector<Vec>& vs) {
  json out = json::array();
  for (const Vec& v : vs) out.push_back(json_vec(v));
  return out;
}

std::vector<Vec> vec_list_from_json(const nlohmann::json& j) {
  std::vector<Vec> out;
  for (const auto& e : j) out.push_back(vec_from_json(e));
  return out;
}

std::vector<WoldVector> wold_list(const FramePtr& fr, const std::vector<Vec>& vs) {
  std::vector<WoldVector> out;
  for (const Vec& v : vs) out.push_back(WoldVector{fr, v});
  return out;
}

// --- generator internals --------------------------------------------------

BlaschkeProduct random_blaschke(Rng& rng, int extra_zeros, bool with_origin,
                                std::vector<cplx> base = {}) {
  std::vector<cplx> zs = std::move(base);
  if (with_origin) zs.push_back(cplx(0.0, 0.0));
  for (int i = 0; i < extra_zeros; ++i) {
    const double rho = 0.15 + 0.55 * rng.uniform();
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    zs.push_back(std::polar(rho, th));
  }
  return BlaschkeProduct(zs);
}

// family of vectors sum_a B^a g_a whose lag components live in mutually
// orthogonal subspaces of the block-0 fiber space: any two members and their
// distinct block translates are then orthogonal by construction
struct Family {
  bool ok = false;
  std::vector<Vec> vecs;
  Mat C0;  // block-0 directions untouched by the family
  double block0_sigma_min = 0.0;
};

Family structured_family(Rng& rng, const WoldFrame& fr, int nvecs, int nlags,
                         const std::vector<Vec>& constraints, int s0_dim,
                         int lag1_dim) {
  Family fam;
  const int lm = fr.l() * fr.m();
  if (nlags < 1 || s0_dim < 1) return fam;
  if (nlags == 1) lag1_dim = 0;
  if (s0_dim + lag1_dim > lm) return fam;
  // random unitary on the fiber space
  Mat Q(lm, lm);
  {
    Mat raw(lm, lm);
    for (int c = 0; c < lm; ++c) raw.col(c) = rng.cvec(lm);
    Eigen::HouseholderQR<Mat> qr(raw);
    Q = qr.householderQ();
  }
  std::vector<int> dims{s0_dim};
  if (nlags > 1) dims.push_back(lag1_dim);
  std::vector<Mat> S;
  int off = 0;
  for (size_t a = 0; a < dims.size(); ++a) {
    S.push_back(Q.middleCols(off, dims[a]));
    off += dims[a];
  }
  nlags = static_cast<int>(dims.size());
  fam.C0 = Q.rightCols(lm - off);
  const int total = off;

  auto make = [&](const Vec& coef) {
    Vec v = Vec::Zero(fr.dim());
    int o = 0;
    for (int a = 0; a < nlags; ++a) {
      v.segment(a * lm, lm) += S[a] * coef.segment(o, dims[a]);
      o += dims[a];
    }
    return v;
  };

  Mat null;
  if (!constraints.empty()) {
    Mat C(constraints.size(), total);
    for (int t = 0; t < total; ++t) {
      Vec e = Vec::Zero(total);
      e[t] = 1.0;
      const Vec col = make(e);
      for (size_t ci = 0; ci < constraints.size(); ++ci)
        C(static_cast<Eigen::Index>(ci), t) = constraints[ci].dot(col);
    }
    Eigen::JacobiSVD<Mat> svd(C, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(sv.size() ? sv[0] : 0.0, 1.0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
      if (sv[i] > cut) ++r;
    null = svd.matrixV().rightCols(total - r);
  } else {
    null = Mat::Identity(total, total);
  }
  if (null.cols() < nvecs) return fam;

  std::vector<Vec> raw;
  for (int i = 0; i < nvecs; ++i)
    raw.push_back(make(null * rng.cvec(static_cast<int>(null.cols()))));
  Subspace sp = orthonormalize(nullptr, raw, 1e-10, -1.0);
  if (sp.dim() < nvecs) return fam;
  for (int i = 0; i < nvecs; ++i) fam.vecs.push_back(sp.onb.col(i));

  Mat blk0(lm, nvecs);
  for (int i = 0; i < nvecs; ++i) blk0.col(i) = fam.vecs[i].head(lm);
  Eigen::JacobiSVD<Mat> s0(blk0);
  fam.block0_sigma_min = s0.singularValues().size()
                             ? s0.singularValues()[s0.singularValues().size() - 1]
                             : 0.0;
  fam.ok = true;
  return fam;
}

Vec shift_up_n(const WoldFrame& fr, Vec v, int n) {
  for (int k = 0; k < n; ++k) v = shift_up_coords(fr, v);
  return v;
}

// elements sum_n B^n (G A_n + h_n) + B^{n+1} J alpha_n from coefficient
// matrices A (N x (p + ndef)) and optional block-0 payload H (N x lm)
Vec synth_element(const WoldFrame& fr, const std::vector<Vec>& G,
                  const std::vector<Vec>& J, const Mat& A, const Mat& H) {
  const int p = static_cast<int>(G.size());
  const int nd = static_cast<int>(J.size());
  const int N = fr.N();
  Vec out = Vec::Zero(fr.dim());
  for (int n = 0; n < N; ++n) {
    Vec term = Vec::Zero(fr.dim());
    for (int i = 0; i < p; ++i) term += A(n, i) * G[i];
    if (H.size() > 0) term.head(H.cols()) += H.row(n).transpose();
    out += shift_up_n(fr, term, n);
    if (nd > 0) {
      Vec tj = Vec::Zero(fr.dim());
      for (int i = 0; i < nd; ++i) tj += A(n, p + i) * J[i];
      out += shift_up_n(fr, tj, n + 1);
    }
  }
  return out;
}

// close coefficient data under the block left shift
template <typename T>
std::vector<T> shift_closure(const std::vector<T>& gens, int N,
                             const std::function<T(const T&)>& down) {
  std::vector<T> all = gens;
  std::vector<T> frontier = gens;
  for (int r = 0; r < N; ++r) {
    std::vector<T> next;
    for (const T& g : frontier) next.push_back(down(g));
    all.insert(all.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return all;
}

Mat shift_rows_down(const Mat& A) {
  Mat out = Mat::Zero(A.rows(), A.cols());
  out.topRows(A.rows() - 1) = A.bottomRows(A.rows() - 1);
  return out;
}

std::vector<Vec> model_projection_raw(const WoldFrame& fr, const BlaschkeProduct& Bp) {
  const ModelBasis mb = tm_basis(Bp, fr.D());
  const int rows = fr.N() * fr.l();
  const int m = fr.m();
  std::vector<Vec> out;
  for (int k = 0; k < Bp.degree(); ++k) {
    Vec scal(rows);
    for (int r = 0; r < rows; ++r)
      scal[r] = (fr.scalar_funcs().row(r).conjugate().array() * mb.tm.row(k).array()).sum();
    for (int s = 0; s < m; ++s) {
      Vec v = Vec::Zero(fr.dim());
      for (int r = 0; r < rows; ++r) v[r * m + s] = scal[r];
      out.push_back(std::move(v));
    }
  }
  return out;
}

struct Built {
  std::vector<Vec> G;  // wandering generators
  std::vector<Vec> J;  // shifted defect generators
  Mat M;               // orthonormal basis of the synthesized subspace
};

// converse-built subspace: span of sum_n B^n (G A_n + h_n) + B^{n+1} J alpha_n
// for coefficient generators closed under the row down-shift.  When the
// family is constrained, the two lag subspaces fill the whole fiber space and
// no block-0 payload is possible; otherwise lag 1 is one-dimensional and the
// leftover block-0 directions carry the payload.
Built build_invariant(Rng& rng, const WoldFrame& fr, int p, int ndef,
                      const std::vector<Vec>& constraints, bool h_payload,
                      int rsup, int s0_dim) {
  const int lm = fr.l() * fr.m();
  const int nlags = lm >= 2 ? 2 : 1;
  s0_dim = std::min(std::max(s0_dim, 1), lm - (nlags - 1));
  const int lag1 = (nlags == 1) ? 0 : (constraints.empty() ? 1 : lm - s0_dim);
  const int nv = p + ndef;
  Family fam;
  for (int attempt = 0; attempt < 16 && !fam.ok; ++attempt) {
    fam = structured_family(rng, fr, nv, nlags, constraints, s0_dim, lag1);
    if (fam.ok && s0_dim >= nv && fam.block0_sigma_min < 0.05) fam.ok = false;
  }
  if (!fam.ok) throw std::runtime_error("generator: structured family failed");
  Built b;
  for (int i = 0; i < p; ++i) b.G.push_back(fam.vecs[i]);
  for (int i = 0; i < ndef; ++i) b.J.push_back(fam.vecs[p + i]);

  const int N = fr.N();
  const int c0 = h_payload ? static_cast<int>(fam.C0.cols()) : 0;
  rsup = std::max(1, std::min(rsup, N));
  using Gen = std::pair<Mat, Mat>;  // (A: N x nv, H: N x lm)
  std::vector<Gen> gens;
  for (int g = 0; g < 2; ++g) {
    Mat A = Mat::Zero(N, std::max(nv, 0)), H = Mat::Zero(N, lm);
    for (int n = 0; n < rsup; ++n) {
      if (nv > 0) A.row(n) = rng.cvec(nv).transpose();
      if (c0 > 0) H.row(n) = (fam.C0 * rng.cvec(c0)).transpose();
    }
    gens.emplace_back(std::move(A), std::move(H));
  }
  for (int i = 0; i < nv; ++i) {
    Mat A = Mat::Zero(N, nv), H = Mat::Zero(N, lm);
    A(0, i) = 1.0;
    gens.emplace_back(std::move(A), std::move(H));
  }
  std::function<Gen(const Gen&)> down = [](const Gen& g) {
    return Gen{shift_rows_down(g.first), shift_rows_down(g.second)};
  };
  const auto all = shift_closure(gens, N, down);
  std::vector<Vec> mv;
  for (const auto& [A, H] : all) mv.push_back(synth_element(fr, b.G, b.J, A, H));
  b.M = orthonormalize(nullptr, mv, 1e-10, 1.0).onb;
  return b;
}

// invertible mix plus directions orthogonal to M: the perturbation restricted
// to M is unchanged while the supplied pairs no longer expose the generators
void disguise_pairs(Rng& rng, const WoldFrame& fr, const Mat& Monb,
                    const std::vector<Vec>& G, int k,
                    std::vector<Vec>& Us, std::vector<Vec>& Vs) {
  const int p = static_cast<int>(G.size());
  const int dim = fr.dim();
  Mat L(dim, k), R(dim, k);
  for (int i = 0; i < p; ++i) {
    L.col(i) = shift_down_coords(fr, G[i]);
    R.col(i) = G[i];
  }
  for (int i = p; i < k; ++i) {
    L.col(i) = rng.cvec(dim);
    Vec y = rng.cvec(dim);
    y -= Monb * (Monb.adjoint() * y);
    R.col(i) = y;
  }
  Mat A = Mat::Identity(k, k) * 2.0;
  for (int c = 0; c < k; ++c) A.col(c) += 0.5 * rng.cvec(k);
  const Mat Vm = L * A;
  const Mat Um = R * A.inverse().adjoint();
  for (int i = 0; i < k; ++i) {
    Us.push_back(Um.col(i));
    Vs.push_back(Vm.col(i));
  }
}

// shift_down-invariant subspace from seeds clear of the top block
Mat invariant_random_subspace(Rng& rng, const WoldFrame& fr, int nseeds) {
  const int lm = fr.l() * fr.m();
  const int low = lm * (fr.N() - 1);
  std::vector<Vec> seeds;
  for (int i = 0; i < nseeds; ++i) {
    Vec v = Vec::Zero(fr.dim());
    v.head(low) = rng.cvec(low);
    seeds.push_back(std::move(v));
  }
  std::function<Vec(const Vec&)> down = [&fr](const Vec& v) {
    return shift_down_coords(fr, v);
  };
  const auto all = shift_closure(seeds, fr.N(), down);
  return orthonormalize(nullptr, all, 1e-10, -1.0).onb;
}

// --- parameter drawing ----------------------------------------------------

int iclamp(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

ScenarioParams clamp_ranges(const ScenarioParams& r) {
  ScenarioParams p = r;
  p.l = iclamp(p.l, 1, 3);
  p.lp = iclamp(p.lp, 1, 5);
  p.m = iclamp(p.m, 1, 3);
  p.k = iclamp(p.k, 1, 3);
  p.N = iclamp(p.N, 3, 10);
  p.D = std::max(p.D, 50);
  p.guard = iclamp(p.guard, 1, p.N - 2);
  if (!(p.tol > 0)) p.tol = 1e-8;
  return p;
}

std::uint64_t stream_seed(std::uint64_t seed, const std::string& theorem) {
  // FNV-1a over the theorem id, folded into the user seed
  std::uint64_t h = 1469598103934665603ULL;
  for (char c : theorem) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return seed * 0x9e3779b97f4a7c15ULL ^ h;
}

std::vector<cplx> draw_zeros(Rng& rng, int count, bool allow_origin_extras,
                             bool origin_only = false) {
  std::vector<cplx> zs;
  for (int i = 0; i < count; ++i) {
    if (origin_only) {
      rng.uniform();  // keep the stream layout independent of the knob
      zs.push_back(cplx(0.0, 0.0));
      continue;
    }
    if (allow_origin_extras && rng.uniform() < 0.2) {
      zs.push_back(cplx(0.0, 0.0));
      continue;
    }
    const double rho = 0.15 + 0.55 * rng.uniform();
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    zs.push_back(std::polar(rho, th));
  }
  return zs;
}

// zeros for an auxiliary divisor, kept clear of the zero set of B: when
// |B(w)| is small the constraint vectors are nearly block-0 supported and
// the constrained family degenerates
std::vector<cplx> draw_divisor_zeros(Rng& rng, const BlaschkeProduct& B, int count) {
  std::vector<cplx> zs;
  for (int i = 0; i < count; ++i) {
    cplx best = 0.0;
    double bestv = -1.0;
    for (int t = 0; t < 16; ++t) {
      const cplx w = draw_zeros(rng, 1, false)[0];
      const double v = std::abs(B.eval(w));
      if (v > bestv) {
        bestv = v;
        best = w;
      }
      if (v >= 0.15) break;
    }
    zs.push_back(best);
  }
  return zs;
}

struct DrawnShape {
  BlaschkeProduct B;
  FramePtr frame;
  int l, m;
};

DrawnShape draw_frame(Rng& rng, ScenarioParams& p, int lmin) {
  DrawnShape d{BlaschkeProduct({cplx(0, 0)}), nullptr, 0, 0};
  d.l = rng.pick(lmin, std::max(lmin, p.l));
  d.m = rng.pick(1, p.m);
  std::vector<cplx> zs{cplx(0.0, 0.0)};
  for (const cplx& w : draw_zeros(rng, d.l - 1, true, p.origin_only)) zs.push_back(w);
  d.B = BlaschkeProduct(zs);
  d.frame = frame_build(d.B, d.m, p.N, p.D);
  p.l = d.l;
  p.m = d.m;
  return d;
}

// --- per-theorem generators -----------------------------------------------

void gen_wandering_family_scenario(Rng& rng, Scenario& sc, bool disguise,
                                   bool complement_side) {
  auto d = draw_frame(rng, sc.params, 1);
  const auto& fr = *d.frame;
  const int lm = d.l * d.m;
  const int nlags = lm >= 2 ? 2 : 1;
  const int s0max = lm - (nlags - 1);
  const int p = rng.pick(1, std::max(1, std::min({sc.params.k, s0max, 2})));
  const int rsup = std::max(1, sc.params.N - 1 - sc.params.guard);
  Built b = build_invariant(rng, fr, p, 0, {}, true, rsup, std::max(p, 1));
  sc.payload["B_zeros"] = json_zeros(d.B);
  sc.payload["p"] = p;
  sc.params.lp = d.l;
  if (!complement_side) {
    sc.payload["M"] = json_mat(b.M);
    if (disguise) {
      const int k = std::min(sc.params.k, p + rng.pick(0, 1));
      std::vector<Vec> Us, Vs;
      disguise_pairs(rng, fr, b.M, b.G, std::max(k, p), Us, Vs);
      sc.params.k = static_cast<int>(Us.size());
      sc.payload["U"] = json_vec_list(Us);
      sc.payload["V"] = json_vec_list(Vs);
    } else {
      sc.params.k = p;
      sc.payload["G"] = json_vec_list(b.G);
    }
  } else {
    // the built subspace is the orthocomplement; hand out M and the forward
    // perturbation pairs, plus membership probes
    Subspace Mp{d.frame, b.M, 1e-10};
    Subspace M = complement(Mp);
    sc.payload["M"] = json_mat(M.onb);
    std::vector<Vec> Us, Vs;
    for (const Vec& g : b.G) {
      Us.push_back(shift_down_coords(fr, g));
      Vs.push_back(g);
    }
    sc.params.k = p;
    sc.payload["U"] = json_vec_list(Us);
    sc.payload["V"] = json_vec_list(Vs);
    std::vector<Vec> probes;
    std::vector<int> inside;
    for (int i = 0; i < 10; ++i) {
      Vec v = M.onb * rng.cvec(M.dim());
      v /= v.norm();
      probes.push_back(v);
      inside.push_back(1);
      Vec w = v + 0.7 * (b.M * rng.cvec(static_cast<int>(b.M.cols()))).normalized();
      w /= w.norm();
      probes.push_back(w);
      inside.push_back(0);
    }
    sc.payload["probes"] = json_vec_list(probes);
    sc.payload["probe_inside"] = inside;
  }
}

void gen_lemma36(Rng& rng, Scenario& sc) {
  auto d = draw_frame(rng, sc.params, 1);
  const auto& fr = *d.frame;
  const bool invariant = rng.uniform() < 0.5;
  Mat M;
  if (invariant) {
    M = invariant_random_subspace(rng, fr, 2);
  } else {
    std::vector<Vec> vs;
    const int nd = rng.pick(3, std::min(8, fr.dim()));
    for (int i = 0; i < nd; ++i) vs.push_back(rng.cvec(fr.dim()));
    M = orthonormalize(nullptr, vs, 1e-10, -1.0).onb;
  }
  sc.payload["B_zeros"] = json_zeros(d.B);
  sc.payload["M"] = json_mat(M);
  sc.payload["invariant"] = invariant ? 1 : 0;
}

void gen_lemma39(Rng& rng, Scenario& sc) {
  auto d = draw_frame(rng, sc.params, 1);
  const auto& fr = *d.frame;
  const int lp = rng.pick(1, sc.params.lp);
  const BlaschkeProduct Bp(draw_zeros(rng, lp, false));
  std::vector<Vec> vs;
  const int nd = rng.pick(2, std::min(6, fr.dim()));
  for (int i = 0; i < nd; ++i) vs.push_back(rng.cvec(fr.dim()));
  sc.params.lp = lp;
  sc.payload["B_zeros"] = json_zeros(d.B);
  sc.payload["Bp_zeros"] = json_zeros(Bp);
  sc.payload["M"] = json_mat(orthonormalize(nullptr, vs, 1e-10, -1.0).onb);
}

void gen_thm313(Rng& rng, Scenario& sc) {
  sc.params.l = std::max(sc.params.l, 2);
  auto d = draw_frame(rng, sc.params, 2);
  const auto& fr = *d.frame;
  const int lm = d.l * d.m;
  const int lC = rng.pick(1, std::max(1, std::min({d.l - 1, sc.params.lp - d.l, 2})));
  const int cap = d.m * (d.l - lC);
  const int p = rng.pick(1, std::max(1, std::min({sc.params.k, cap, 2})));
  const int rsup = std::max(1, sc.params.N - 1 - sc.params.guard);
  BlaschkeProduct C;
  Built b;
  bool built = false;
  for (int attempt = 0; attempt < 8 && !built; ++attempt) {
    C = BlaschkeProduct(draw_divisor_zeros(rng, d.B, lC));
    const auto constraints = model_projection_raw(fr, C);
    try {
      b = build_invariant(rng, fr, p, 0, constraints, false, rsup,
                          std::min(p + 1, lm - 1));
      built = true;
    } catch (const std::runtime_error&) {
    }
  }
  if (!built) throw std::runtime_error("generator: structured family failed");
  std::vector<cplx> bp_zeros = d.B.zeros();
  for (const cplx& w : C.zeros()) bp_zeros.push_back(w);
  const BlaschkeProduct Bp(bp_zeros);
  sc.params.lp = Bp.degree();
  sc.params.k = p;
  sc.payload["B_zeros"] = json_zeros(d.B);
  sc.payload["Bp_zeros"] = json_zeros(Bp);
  sc.payload["M"] = json_mat(b.M);
  sc.payload["p"] = p;
}

void gen_thm4x(Rng& rng, Scenario& sc, int nmin, int nmax) {
  const int n = rng.pick(iclamp(nmin, 1, sc.params.k), iclamp(nmax, 1, sc.params.k));
  // deterministic 2-in-5 split so suites cover both cases predictably
  const bool case_ii = (sc.seed % 5) < 2;
  // capacity: m(l-1) >= p+n for the constrained family, lm >= p+n+1 so the
  // block-0 parts can stay independent
  int l = 0, m = 0;
  int p = case_ii ? 0 : 1;
  for (int attempt = 0; attempt < 40; ++attempt) {
    l = rng.pick(2, std::max(2, sc.params.l));
    m = rng.pick(1, sc.params.m);
    const int pmax = std::min({2, sc.params.k, m * (l - 1) - n, l * m - n - 1});
    if (case_ii) {
      if (m * (l - 1) >= n && l * m >= n + 1) { p = 0; break; }
    } else if (pmax >= 1) {
      p = rng.pick(1, pmax);
      break;
    }
    l = 0;
  }
  if (l == 0) {
    l = 3;
    m = 3;
    p = case_ii ? 0 : 1;
  }
  sc.params.l = l;
  sc.params.m = m;
  std::vector<cplx> zs{cplx(0.0, 0.0)};
  for (const cplx& w : draw_zeros(rng, l - 1, true)) zs.push_back(w);
  const BlaschkeProduct B(zs);
  const FramePtr frame = frame_build(B, m, sc.params.N, sc.params.D);
  const int rsup = std::max(1, sc.params.N - 3);
  BlaschkeProduct C;
  Built b;
  bool built = false;
  for (int attempt = 0; attempt < 8 && !built; ++attempt) {
    C = BlaschkeProduct(draw_divisor_zeros(rng, B, 1));
    const auto constraints = model_projection_raw(*frame, C);
    try {
      b = build_invariant(rng, *frame, p, n, constraints, false, rsup,
                          std::min(p + n + 1, l * m - 1));
      built = true;
    } catch (const std::runtime_error&) {
    }
  }
  if (!built) throw std::runtime_error("generator: structured family failed");
  std::vector<cplx> bp_zeros = B.zeros();
  bp_zeros.push_back(C.zeros()[0]);
  const BlaschkeProduct Bp(bp_zeros);
  sc.params.lp = Bp.degree();
  sc.params.k = n;
  sc.payload["B_zeros"] = json_zeros(B);
  sc.payload["Bp_zeros"] = json_zeros(Bp);
  sc.payload["M"] = json_mat(b.M);
  sc.payload["p"] = p;
  sc.payload["n"] = n;
  sc.payload["case_ii"] = case_ii ? 1 : 0;
}

void gen_c0decay(Rng& rng, Scenario& sc) {
  auto d = draw_frame(rng, sc.params, 1);
  const auto& fr = *d.frame;
  sc.payload["B_zeros"] = json_zeros(d.B);
  sc.payload["M"] = json_mat(invariant_random_subspace(rng, fr, 3));
  sc.payload["h"] = json_vec(rng.cvec(fr.dim()));
}

// --- runner internals -----------------------------------------------------

FramePtr frame_from(const Scenario& sc) {
  const BlaschkeProduct B = zeros_from_json(sc.payload.at("B_zeros"));
  return frame_build(B, sc.params.m, sc.params.N, sc.params.D);
}

Subspace subspace_from(const FramePtr& fr, const nlohmann::json& j) {
  return Subspace{fr, mat_from_json(j), 1e-10};
}

void note(LedgerRecord& rec, const std::string& key, double v) {
  rec.residuals[key] = v;
}

bool all_below(const LedgerRecord& rec, double tol) {
  for (const auto& [k, v] : rec.residuals)
    if (!(v <= tol)) return false;
  return true;
}

void note_decomposition(LedgerRecord& rec, const DecompositionResult& res) {
  note(rec, "invariance", res.invariance_residual);
  note(rec, "parseval", res.parseval_gap);
  note(rec, "reconstruction", res.reconstruction_residual);
  note(rec, "k_invariance", res.k_invariance_residual);
  note(rec, "r_support", res.r_support_residual);
  note(rec, "isometry", res.isometry_residual);
  note(rec, "terminal", res.max_terminal_ratio);
}

bool run_thm32(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const auto Us = wold_list(fr, vec_list_from_json(sc.payload.at("U")));
  const auto Vs = wold_list(fr, vec_list_from_json(sc.payload.at("V")));
  const auto res = decompose_thm32(M, Us, Vs, tol);
  note_decomposition(rec, res);
  const auto rep = verify_canonical_conditions(res, M, tol);
  note(rec, "canonical_c1", rep.c1);
  note(rec, "canonical_c2", rep.c2);
  note(rec, "canonical_c3", rep.c3);
  rec.info["p"] = res.p;
  rec.info["dimM"] = M.dim();
  rec.info["dimK"] = res.K.dim();
  rec.info["uniqueness_margin"] = rep.uniqueness_margin;
  const int p_expected = sc.payload.at("p").get<int>();
  return all_below(rec, tol) && rep.pass && res.p == p_expected;
}

bool run_thm36(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const auto G = wold_list(fr, vec_list_from_json(sc.payload.at("G")));
  std::vector<WoldVector> TG;
  for (const auto& g : G) TG.push_back(WoldVector{fr, shift_down_coords(*fr, g.coords)});
  const auto res = decompose_thm32(M, G, TG, tol);
  note_decomposition(rec, res);
  const double conv = check_thm36_converse(res.G, res.K, M, tol);
  note(rec, "converse_invariance", conv);
  rec.info["p"] = res.p;
  rec.info["dimM"] = M.dim();
  return all_below(rec, tol);
}

bool run_thm37(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const auto Us = wold_list(fr, vec_list_from_json(sc.payload.at("U")));
  const auto Vs = wold_list(fr, vec_list_from_json(sc.payload.at("V")));
  const auto out = forward_thm37(M, Us, Vs, tol);
  note(rec, "forward_invariance", out.forward_invariance_residual);
  note(rec, "n_invariance", out.n_invariance_residual);
  note(rec, "unitary", out.unitary_residual);
  note(rec, "inner_reconstruction", out.inner.reconstruction_residual);
  note(rec, "inner_terminal", out.inner.max_terminal_ratio);
  rec.info["p"] = out.p;
  const auto probes = vec_list_from_json(sc.payload.at("probes"));
  const auto inside = sc.payload.at("probe_inside").get<std::vector<int>>();
  int wrong = 0;
  for (size_t i = 0; i < probes.size(); ++i) {
    const bool got = membership_via_model(WoldVector{fr, probes[i]}, out.G,
                                          out.Nspace, 1e-6);
    // ground truth by direct projection, cross-checked against the intent
    // recorded at generation time
    const double outside = (probes[i] - M.project_coords(probes[i])).norm();
    const bool truth = outside <= 1e-6 * std::max(1.0, probes[i].norm());
    if (got != truth || truth != (inside[i] != 0)) ++wrong;
  }
  rec.info["probes"] = static_cast<double>(probes.size());
  rec.info["probes_wrong"] = wrong;
  return all_below(rec, tol) && wrong == 0;
}

bool run_thm310(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const auto out = almost_decompose_thm310(M, tol);
  note(rec, "defect_residual", out.defect.residual);
  note_decomposition(rec, out.dec);
  rec.info["defect"] = out.defect.defect;
  rec.info["p"] = out.dec.p;
  const int k_expected = sc.payload.at("k").get<int>();
  rec.info["k_expected"] = k_expected;
  return all_below(rec, tol) && out.defect.defect <= k_expected;
}

bool run_lemma36(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const OperatorMatrix T = toeplitz_adjoint(fr);
  const auto d = almost_defect(T, M, 1e-10);
  std::vector<std::pair<WoldVector, WoldVector>> pairs;
  for (const auto& f : d.basis)
    pairs.emplace_back(f, WoldVector{fr, T.mat.adjoint() * f.coords});
  const auto rep = almost_equiv_check(T, M, pairs, tol);
  note(rec, "dir_a_invariance", rep.dir_a_invariance);
  note(rec, "dir_b_residual", rep.dir_b_residual);
  rec.info["defect"] = rep.defect;
  rec.info["k"] = rep.k;
  rec.info["invariant"] = sc.payload.value("invariant", 0);
  return rep.pass;
}

bool run_lemma39(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const BlaschkeProduct Bp = zeros_from_json(sc.payload.at("Bp_zeros"));
  const auto wb = wandering_bound_lemma39(M, Bp, tol);
  rec.info["wandering_dim"] = wb.dim;
  rec.info["bound"] = wb.bound;
  note(rec, "bound_excess", std::max(0.0, static_cast<double>(wb.dim - wb.bound)));
  return wb.dim <= wb.bound;
}

bool run_thm313(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const BlaschkeProduct Bp = zeros_from_json(sc.payload.at("Bp_zeros"));
  const auto out = nearly_decompose_thm313(M, Bp, tol);
  note(rec, "nearly", out.nearly_residual);
  note(rec, "h_blocks", out.h_residual);
  note(rec, "unitary", out.unitary_residual);
  note(rec, "n_invariance", out.n_invariance_residual);
  note_decomposition(rec, out.dec);
  // resynthesize every element from its coefficients and compare the span
  // with the original subspace through principal angles
  Mat Gm(fr->dim(), out.p);
  for (int i = 0; i < out.p; ++i) Gm.col(i) = out.dec.G[i].coords;
  std::vector<Vec> rebuilt;
  const int lm = fr->l() * fr->m();
  for (const auto& el : out.dec.elements) {
    Vec v = Vec::Zero(fr->dim());
    for (int n = 0; n < fr->N(); ++n) {
      Vec term = Vec::Zero(fr->dim());
      if (out.p > 0) term = Gm * el.A.col(n);
      term.head(lm) += el.Hblocks.col(n);
      v += shift_up_n(*fr, term, n);
    }
    rebuilt.push_back(std::move(v));
  }
  const Subspace Mre = orthonormalize(fr, rebuilt, 1e-10, 1.0);
  double angle = std::numbers::pi / 2.0;
  if (Mre.dim() == M.dim()) {
    angle = 0.0;
    for (double a : principal_angles(M, Mre)) angle = std::max(angle, a);
  }
  note(rec, "rebuild_angle", angle);
  rec.info["p"] = out.p;
  rec.info["dimM"] = M.dim();
  const int p_expected = sc.payload.at("p").get<int>();
  // principal angles bottom out near sqrt(machine eps), so the rebuild
  // check carries its own threshold instead of the uniform tolerance
  bool ok = angle <= 1e-6 && out.p == p_expected;
  for (const auto& [key, v] : rec.residuals)
    if (key != "rebuild_angle" && !(v <= tol)) ok = false;
  return ok;
}

bool run_thm4x(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const BlaschkeProduct Bp = zeros_from_json(sc.payload.at("Bp_zeros"));
  const auto out = nearly_defect_decompose(M, Bp, tol);
  note(rec, "nearly", out.nearly_residual);
  note(rec, "norm_identity", out.norm_gap);
  note(rec, "reconstruction", out.reconstruction_residual);
  note(rec, "k_invariance", out.k_invariance_residual);
  note(rec, "isometry", out.isometry_residual);
  note(rec, "terminal", out.max_terminal_ratio);
  rec.info["p"] = out.p;
  rec.info["defect"] = out.defect;
  rec.info["contained"] = out.contained ? 1 : 0;
  const int p_expected = sc.payload.at("p").get<int>();
  const int n_expected = sc.payload.at("n").get<int>();
  const bool case_ii = sc.payload.at("case_ii").get<int>() != 0;
  const auto rep = nearly_defect_converse(out.G, out.K, out.Js, Bp, tol);
  note(rec, "converse_residual", rep.residual);
  rec.info["converse_defect"] = rep.defect;
  return all_below(rec, tol) && rep.pass && out.defect <= n_expected &&
         out.p == p_expected && out.contained == case_ii;
}

bool run_c0decay(const Scenario& sc, double tol, LedgerRecord& rec) {
  const FramePtr fr = frame_from(sc);
  const Subspace M = subspace_from(fr, sc.payload.at("M"));
  const WoldVector h{fr, vec_from_json(sc.payload.at("h"))};
  const int N = fr->N();
  const auto prof = c0_decay(toeplitz_forward(fr), M, h, N + 2);
  const double hn = std::max(h.norm(), 1e-300);
  double mono = 0.0;
  double prev = hn;
  for (double v : prof) {
    mono = std::max(mono, (v - prev) / hn);
    prev = v;
  }
  note(rec, "terminal_decay", prof[N - 1] / hn);
  note(rec, "contraction", mono);
  rec.info["dimM"] = M.dim();
  return all_below(rec, tol);
}

}  // namespace

// --- public API -----------------------------------------------------------

bool known_theorem(const std::string& id) {
  static const char* ids[] = {"thm32", "thm36",  "thm37",  "thm310", "lemma36",
                              "lemma39", "thm313", "thm42",  "thm44",  "thm45",
                              "c0decay"};
  for (const char* s : ids)
    if (id == s) return true;
  return false;
}

Scenario generate(std::uint64_t seed, const std::string& theorem,
                  const ScenarioParams& ranges) {
  if (!known_theorem(theorem))
    throw std::invalid_argument("generate: unknown theorem id: " + theorem);
  Scenario sc;
  sc.seed = seed;
  sc.theorem = theorem;
  sc.params = clamp_ranges(ranges);
  sc.payload = nlohmann::ordered_json::object();
  Rng rng(stream_seed(seed, theorem));
  if (theorem == "thm32")
    gen_wandering_family_scenario(rng, sc, true, false);
  else if (theorem == "thm36")
    gen_wandering_family_scenario(rng, sc, false, false);
  else if (theorem == "thm37")
    gen_wandering_family_scenario(rng, sc, false, true);
  else if (theorem == "thm310") {
    gen_wandering_family_scenario(rng, sc, false, false);
    sc.payload["k"] = sc.payload["p"];
    sc.payload.erase("G");
  } else if (theorem == "lemma36")
    gen_lemma36(rng, sc);
  else if (theorem == "lemma39")
    gen_lemma39(rng, sc);
  else if (theorem == "thm313")
    gen_thm313(rng, sc);
  else if (theorem == "thm42")
    gen_thm4x(rng, sc, 1, 1);
  else if (theorem == "thm44")
    gen_thm4x(rng, sc, 1, 2);
  else if (theorem == "thm45")
    gen_thm4x(rng, sc, 2, 3);
  else if (theorem == "c0decay")
    gen_c0decay(rng, sc);
  return sc;
}

LedgerRecord run(const Scenario& sc, double tol) {
  LedgerRecord rec;
  rec.seed = sc.seed;
  rec.theorem = sc.theorem;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (sc.schema != kSchemaVersion)
      throw std::invalid_argument("run: unsupported schema version");
    if (!known_theorem(sc.theorem))
      throw std::invalid_argument("run: unknown theorem id: " + sc.theorem);
    bool ok = false;
    if (sc.theorem == "thm32")
      ok = run_thm32(sc, tol, rec);
    else if (sc.theorem == "thm36")
      ok = run_thm36(sc, tol, rec);
    else if (sc.theorem == "thm37")
      ok = run_thm37(sc, tol, rec);
    else if (sc.theorem == "thm310")
      ok = run_thm310(sc, tol, rec);
    else if (sc.theorem == "lemma36")
      ok = run_lemma36(sc, tol, rec);
    else if (sc.theorem == "lemma39")
      ok = run_lemma39(sc, tol, rec);
    else if (sc.theorem == "thm313")
      ok = run_thm313(sc, tol, rec);
    else if (sc.theorem == "thm42" || sc.theorem == "thm44" || sc.theorem == "thm45")
      ok = run_thm4x(sc, tol, rec);
    else if (sc.theorem == "c0decay")
      ok = run_c0decay(sc, tol, rec);
    rec.status = ok ? "pass" : "fail";
    if (!ok && rec.message.empty()) rec.message = "invariant residual above tolerance";
  } catch (const HypothesisError& e) {
    rec.status = "invalid-instance";
    rec.message = "hypothesis '" + e.hypothesis + "' failed: " + e.what();
  } catch (const std::exception& e) {
    rec.status = "invalid-instance";
    rec.message = e.what();
  }
  const auto t1 = std::chrono::steady_clock::now();
  rec.elapsed_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  return rec;
}

std::string scenario_to_json(const Scenario& sc) {
  nlohmann::ordered_json j;
  j["schema"] = sc.schema;
  j["seed"] = sc.seed;
  j["theorem"] = sc.theorem;
  j["params"] = {{"l", sc.params.l},       {"lp", sc.params.lp},
                 {"m", sc.params.m},       {"k", sc.params.k},
                 {"N", sc.params.N},       {"D", sc.params.D},
                 {"guard", sc.params.guard}, {"tol", sc.params.tol}};
  j["payload"] = sc.payload;
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  const auto j = nlohmann::ordered_json::parse(text);
  Scenario sc;
  sc.schema = j.at("schema").get<int>();
  sc.seed = j.at("seed").get<std::uint64_t>();
  sc.theorem = j.at("theorem").get<std::string>();
  const auto& p = j.at("params");
  sc.params.l = p.at("l").get<int>();
  sc.params.lp = p.at("lp").get<int>();
  sc.params.m = p.at("m").get<int>();
  sc.params.k = p.at("k").get<int>();
  sc.params.N = p.at("N").get<int>();
  sc.params.D = p.at("D").get<int>();
  sc.params.guard = p.at("guard").get<int>();
  sc.params.tol = p.at("tol").get<double>();
  sc.payload = j.at("payload");
  return sc;
}

std::string record_to_json(const LedgerRecord& rec) {
  nlohmann::ordered_json j;
  j["schema"] = rec.schema;
  j["seed"] = rec.seed;
  j["theorem"] = rec.theorem;
  j["status"] = rec.status;
  j["residuals"] = rec.residuals;
  j["info"] = rec.info;
  j["message"] = rec.message;
  j["elapsed_ms"] = rec.elapsed_ms;
  return j.dump();
}

LedgerRecord record_from_json(const std::string& line) {
  const auto j = nlohmann::ordered_json::parse(line);
  LedgerRecord rec;
  rec.schema = j.at("schema").get<int>();
  rec.seed = j.at("seed").get<std::uint64_t>();
  rec.theorem = j.at("theorem").get<std::string>();
  rec.status = j.at("status").get<std::string>();
  rec.residuals = j.at("residuals").get<std::map<std::string, double>>();
  rec.info = j.at("info").get<std::map<std::string, double>>();
  rec.message = j.at("message").get<std::string>();
  rec.elapsed_ms = j.at("elapsed_ms").get<double>();
  return rec;
}

Summary summarize(const std::vector<LedgerRecord>& records) {
  Summary s;
  for (const auto& r : records) {
    ++s.total;
    if (r.status == "pass")
      ++s.passed;
    else if (r.status == "fail") {
      ++s.failed;
      s.failing_seeds.push_back(r.seed);
    } else {
      ++s.invalid;
      s.failing_seeds.push_back(r.seed);
    }
    for (const auto& [k, v] : r.residuals) {
      auto it = s.worst_residuals.find(k);
      if (it == s.worst_residuals.end() || v > it->second) s.worst_residuals[k] = v;
    }
    s.total_ms += r.elapsed_ms;
  }
  return s;
}

std::string summary_text(const Summary& s) {
  std::ostringstream os;
  os << "records: " << s.total << "  pass: " << s.passed << "  fail: " << s.failed
     << "  invalid: " << s.invalid << "\n";
  os << "worst residuals:\n";
  for (const auto& [k, v] : s.worst_residuals) {
    os.setf(std::ios::scientific);
    os.precision(3);
    os << "  " << k << ": " << v << "\n";
    os.unsetf(std::ios::scientific);
  }
  if (!s.failing_seeds.empty()) {
    os << "non-passing seeds:";
    for (auto sd : s.failing_seeds) os << " " << sd;
    os << "\n";
  }
  os.precision(1);
  os.setf(std::ios::fixed);
  os << "elapsed: " << s.total_ms << " ms\n";
  return os.str();
}

std::string summary_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["total"] = s.total;
  j["passed"] = s.passed;
  j["failed"] = s.failed;
  j["invalid"] = s.invalid;
  j["worst_residuals"] = s.worst_residuals;
  j["non_passing_seeds"] = s.failing_seeds;
  j["elapsed_ms"] = s.total_ms;
  return j.dump(2) + "\n";
}

}  // namespace hardylab::lab
