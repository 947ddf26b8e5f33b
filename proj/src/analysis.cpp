#include "sdms/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <thread>

#include "sdms/binio.hpp"
#include "sdms/multigrid.hpp"

namespace sdms {

namespace {

constexpr char kMagic[5] = "SDRF";
constexpr std::uint32_t kVersion = 1;

// CSR pattern of a continuous P2 discretization.
SparseMatrix p2_pattern(int n, const std::vector<std::array<int, 6>>& cells) {
  std::vector<int> start(n + 1, 0);
  for (const auto& c : cells)
    for (int d : c) start[d + 1] += 6;
  for (int i = 0; i < n; ++i) start[i + 1] += start[i];
  std::vector<int> cols(start[n]);
  std::vector<int> fill(start.begin(), start.end() - 1);
  for (const auto& c : cells)
    for (int d : c)
      for (int e : c) cols[fill[d]++] = e;
  std::vector<int> rp(n + 1, 0), ci;
  ci.reserve(cols.size() / 3);
  for (int r = 0; r < n; ++r) {
    auto b = cols.begin() + start[r], e = cols.begin() + start[r + 1];
    std::sort(b, e);
    e = std::unique(b, e);
    ci.insert(ci.end(), b, e);
    rp[r + 1] = static_cast<int>(ci.size());
  }
  std::vector<double> v(ci.size(), 0.0);
  return SparseMatrix(n, n, std::move(rp), std::move(ci), std::move(v));
}

SparseMatrix submatrix(const SparseMatrix& a, int off, int n) {
  std::vector<int> rp(n + 1, 0), ci;
  std::vector<double> v;
  for (int r = 0; r < n; ++r) {
    for (int k = a.row_ptr()[off + r]; k < a.row_ptr()[off + r + 1]; ++k) {
      const int c = a.col_idx()[k] - off;
      if (c < 0 || c >= n) continue;
      ci.push_back(c);
      v.push_back(a.values()[k]);
    }
    rp[r + 1] = static_cast<int>(ci.size());
  }
  return SparseMatrix(n, n, std::move(rp), std::move(ci), std::move(v));
}

// Block diagonal [a 0; 0 s*b] without going through triplets.
SparseMatrix stack_diagonal(const SparseMatrix& a, const SparseMatrix& b, double s) {
  const int n = a.rows() + b.rows();
  std::vector<int> rp(n + 1, 0), ci;
  std::vector<double> v;
  ci.reserve(a.nnz() + b.nnz());
  v.reserve(a.nnz() + b.nnz());
  ci.insert(ci.end(), a.col_idx().begin(), a.col_idx().end());
  v.insert(v.end(), a.values().begin(), a.values().end());
  std::copy(a.row_ptr().begin(), a.row_ptr().end(), rp.begin());
  for (int c : b.col_idx()) ci.push_back(c + a.cols());
  for (double x : b.values()) v.push_back(s * x);
  for (int r = 0; r < b.rows(); ++r) rp[a.rows() + r + 1] = static_cast<int>(a.nnz()) + b.row_ptr()[r + 1];
  return SparseMatrix(n, n, std::move(rp), std::move(ci), std::move(v));
}

std::array<double, 3> edge_p2(double t) { return {(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)}; }

// Stokes-side and Darcy-side P2 dofs of one interface edge: endpoint a, endpoint b, midpoint.
struct EdgeDofs {
  Point a, b;
  std::array<int, 3> dof;
};

std::vector<EdgeDofs> interface_edges(const TriMesh& m, const P2DofMap& d) {
  std::vector<EdgeDofs> out(m.n());
  const auto& be = m.boundary_edges();
  for (std::size_t k = 0; k < be.size(); ++k) {
    if (be[k].marker != BoundaryMarker::interface) continue;
    const Point a = m.vertices()[be[k].a], b = m.vertices()[be[k].b];
    const double xm = 0.5 * (a.x + b.x);
    const int slot = static_cast<int>(std::floor((xm - m.rect().x0) / m.rect().width() * m.n()));
    out.at(slot) = {a, b, {be[k].a, be[k].b, d.boundary_edge_dof[k]}};
  }
  return out;
}

struct Hierarchy {
  std::vector<SparseMatrix> p;
  std::vector<std::vector<bool>> masks;
};

// P2 (components blocks) -> P1 on the same mesh -> structured P1 coarsening.
Hierarchy build_hierarchy(const TriMesh& mesh, const P2DofMap& dofs, const std::vector<bool>& mask, int components) {
  Hierarchy h;
  const int n2 = dofs.num_dofs, nv = dofs.num_vertices;
  h.p.push_back(block_diagonal(p1_to_p2(dofs), components));
  std::vector<bool> m1(components * nv);
  for (int c = 0; c < components; ++c)
    for (int v = 0; v < nv; ++v) m1[c * nv + v] = mask[c * n2 + v];
  h.masks.push_back(m1);
  const auto coarse = coarsening_hierarchy(mesh, 4);
  const TriMesh* fine = &mesh;
  for (const auto& cm : coarse) {
    h.p.push_back(block_diagonal(p1_prolongation(cm, *fine), components));
    const int nf = static_cast<int>(fine->num_vertices()), nc = static_cast<int>(cm.num_vertices());
    std::vector<bool> mc(components * nc);
    for (int c = 0; c < components; ++c) {
      std::vector<bool> f(h.masks.back().begin() + c * nf, h.masks.back().begin() + (c + 1) * nf);
      const auto inj = inject_mask(cm, *fine, f);
      std::copy(inj.begin(), inj.end(), mc.begin() + c * nc);
    }
    h.masks.push_back(std::move(mc));
    fine = &cm;
  }
  // coarsening_hierarchy returns owned meshes; prolongations only keep indices
  return h;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CoupledSolution wrap_reference(const ReferenceConfig& cfg, Vector stokes, Vector head) {
  auto sm = std::make_shared<const TriMesh>(build_stokes_mesh(cfg.n_s, cfg.diagonal));
  auto dm = std::make_shared<const TriMesh>(build_darcy_mesh(cfg.n_d, cfg.diagonal));
  auto sd = std::make_shared<const P2DofMap>(build_p2_dofs(*sm));
  auto dd = std::make_shared<const P2DofMap>(build_p2_dofs(*dm));
  CoupledSolution s;
  s.flow = std::make_shared<TaylorHoodField>(sm, sd, stokes);
  s.head = std::make_shared<P2HeadField>(dm, dd, head);
  s.stokes_dofs = std::move(stokes);
  s.head_dofs = std::move(head);
  s.info.method = "reference";
  return s;
}

}  // namespace

P2DarcyOperators assemble_p2_darcy(const TriMesh& mesh, const P2DofMap& dofs, const CoefficientField& k,
                                   const ScalarSource& source) {
  P2DarcyOperators ops;
  ops.stiffness = p2_pattern(dofs.num_dofs, dofs.cell);
  ops.load.assign(dofs.num_dofs, 0.0);
  auto& vals = ops.stiffness.values();
  const auto& rp = ops.stiffness.row_ptr();
  const auto& ci = ops.stiffness.col_idx();
  const auto& q = quad_triangle(6);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(static_cast<int>(t));
    const auto geo = p1_gradients(c);
    std::array<std::array<double, 6>, 6> loc{};
    std::array<double, 6> f{};
    for (std::size_t p = 0; p < q.size(); ++p) {
      const Point x = map_point(c, q.points[p]);
      const double w = 2 * geo.area * q.weights[p];
      const double kw = w * k.checked(x.x, x.y);
      const auto g = p2_gradients(q.points[p], geo.grad);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) loc[i][j] += kw * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
      if (source) {
        const auto v = p2_values(q.points[p]);
        const double fw = w * source.f(x.x, x.y);
        for (int i = 0; i < 6; ++i) f[i] += fw * v[i];
      }
    }
    const auto& cell = dofs.cell[t];
    for (int i = 0; i < 6; ++i) {
      const int r = cell[i];
      ops.load[r] += f[i];
      for (int j = 0; j < 6; ++j) {
        const auto b = ci.begin() + rp[r], e = ci.begin() + rp[r + 1];
        vals[std::lower_bound(b, e, cell[j]) - ci.begin()] += loc[i][j];
      }
    }
  }
  ops.dirichlet.assign(dofs.num_dofs, false);
  const auto& be = mesh.boundary_edges();
  for (std::size_t e = 0; e < be.size(); ++e) {
    if (be[e].marker != BoundaryMarker::darcy_exterior) continue;
    ops.dirichlet[be[e].a] = ops.dirichlet[be[e].b] = ops.dirichlet[dofs.boundary_edge_dof[e]] = true;
  }
  return ops;
}

std::uint64_t reference_hash(const ReferenceConfig& cfg) {
  std::string s = "sdrf1|k=" + (cfg.k ? cfg.k->id() : std::string("none"));
  s += "|nu=" + fmt(cfg.stokes.nu) + "|alpha=" + fmt(cfg.stokes.alpha) + "|g=" + fmt(cfg.stokes.g);
  s += "|bjs=" + std::string(cfg.stokes.bjs_simplified ? "simplified" : "full");
  s += "|data=" + cfg.data_id + "|src=" + (cfg.source ? cfg.source.id : std::string("none"));
  s += "|ns=" + std::to_string(cfg.n_s) + "|nd=" + std::to_string(cfg.n_d);
  s += "|diag=" + std::to_string(static_cast<int>(cfg.diagonal)) + "|tol=" + fmt(cfg.tol);
  return fnv1a(s);
}

CoupledSolution reference_solve(const ReferenceConfig& cfg) {
  if (!cfg.k) throw std::invalid_argument("reference: no coefficient");
  if (cfg.n_s < 1 || cfg.n_d < cfg.n_s || cfg.n_d % cfg.n_s != 0)
    throw std::invalid_argument("reference: n_d must be a positive multiple of n_s");
  const double eps = cfg.k->epsilon();
  if (eps > 0.0 && 1.0 / cfg.n_d > eps / 4.0 * (1.0 + 1e-12))
    throw InsufficientResolutionError("reference: H_D = 1/" + std::to_string(cfg.n_d) + " does not resolve eps = " +
                                      fmt(eps) + " (need H_D <= eps/4)");
  if (cfg.stokes_data.interface_as_wall) throw std::invalid_argument("reference: interface cannot be a wall");
  const auto t0 = std::chrono::steady_clock::now();

  const TriMesh sm = build_stokes_mesh(cfg.n_s, cfg.diagonal);
  const TriMesh dm = build_darcy_mesh(cfg.n_d, cfg.diagonal);
  const P2DofMap sd = build_p2_dofs(sm), dd = build_p2_dofs(dm);
  const TaylorHoodLayout lay{sd.num_dofs, static_cast<int>(sm.num_vertices())};
  auto sb = assemble_taylor_hood(sm, sd, lay, cfg.stokes, cfg.k.get(), cfg.stokes_data);
  auto darcy = assemble_p2_darcy(dm, dd, *cfg.k, cfg.source);
  const double g = cfg.stokes.g;
  const int ns = lay.size(), nd = dd.num_dofs, n = ns + nd;

  // +g(φ, v·n) in the momentum rows, −g(ψ, u·n) in the head rows, with w·n = −w_y.
  CooAccumulator cpl(n, n);
  {
    const auto se = interface_edges(sm, sd);
    const auto de = interface_edges(dm, dd);
    const int ratio = cfg.n_d / cfg.n_s;
    const auto& q = quad_edge(3);
    for (int i = 0; i < cfg.n_d; ++i) {
      const auto& fe = de[i];
      const auto& ce = se[i / ratio];
      const double len = std::abs(fe.b.x - fe.a.x);
      for (std::size_t k = 0; k < q.size(); ++k) {
        const double s = q.points[k][1];
        const double x = fe.a.x + s * (fe.b.x - fe.a.x);
        const auto nd_ = edge_p2(s);
        const auto ns_ = edge_p2((x - ce.a.x) / (ce.b.x - ce.a.x));
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            const double m = g * len * q.weights[k] * nd_[a] * ns_[b];
            cpl.add(lay.uy(ce.dof[b]), ns + fe.dof[a], -m);
            cpl.add(ns + fe.dof[a], lay.uy(ce.dof[b]), m);
          }
      }
    }
  }
  SparseMatrix a = add(stack_diagonal(sb.matrix, darcy.stiffness, g), cpl.finalize());
  darcy.stiffness = SparseMatrix();
  sb.matrix = SparseMatrix();
  Vector rhs(n, 0.0);
  std::copy(sb.rhs.begin(), sb.rhs.end(), rhs.begin());
  for (int i = 0; i < nd; ++i) rhs[ns + i] = g * darcy.load[i];
  std::vector<bool> mask = sb.dirichlet;
  mask.insert(mask.end(), darcy.dirichlet.begin(), darcy.dirichlet.end());
  Vector values = sb.dirichlet_values;
  values.resize(n, 0.0);
  apply_dirichlet(a, rhs, mask, values);

  const int nvel = lay.velocity_size();
  const std::vector<bool> vmask(mask.begin(), mask.begin() + nvel);
  auto vh = build_hierarchy(sm, sd, vmask, 2);
  const Multigrid mg_v(submatrix(a, 0, nvel), vmask, std::move(vh.p), std::move(vh.masks));
  auto dh = build_hierarchy(dm, dd, darcy.dirichlet, 1);
  const Multigrid mg_d(submatrix(a, ns, nd), darcy.dirichlet, std::move(dh.p), std::move(dh.masks));
  Vector lumped(lay.nv, 0.0);
  for (int v = 0; v < lay.nv; ++v) {
    const int r = lay.p(v);
    for (int k = sb.pressure_mass.row_ptr()[r]; k < sb.pressure_mass.row_ptr()[r + 1]; ++k)
      lumped[v] += sb.pressure_mass.values()[k];
  }
  const double nu = cfg.stokes.nu;
  auto precondition = [&](std::span<const double> r, std::span<double> y) {
    mg_v.vcycle(r.subspan(0, nvel), y.subspan(0, nvel));
    for (int v = 0; v < lay.nv; ++v) y[nvel + v] = nu * r[nvel + v] / lumped[v];
    mg_d.vcycle(r.subspan(ns, nd), y.subspan(ns, nd));
  };
  Vector tmp(n);
  auto op = [&](std::span<const double> v, std::span<double> w) {
    precondition(v, tmp);
    a.multiply(tmp, w);
  };
  const auto res = gmres(op, rhs, cfg.tol, cfg.max_iter, cfg.restart);
  Vector x(n);
  precondition(res.x, x);

  auto sol = wrap_reference(cfg, Vector(x.begin(), x.begin() + ns), Vector(x.begin() + ns, x.end()));
  sol.info.iterations = res.iterations;
  sol.info.stokes_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

std::string reference_cache_path(const ReferenceConfig& cfg, const std::string& dir) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "reference_%016llx.sdrf", static_cast<unsigned long long>(reference_hash(cfg)));
  return (std::filesystem::path(dir) / buf).string();
}

void save_reference(const ReferenceConfig& cfg, const CoupledSolution& sol, const std::string& path) {
  ByteWriter w;
  w.magic(kMagic);
  w.u32(kVersion);
  w.u64(reference_hash(cfg));
  w.u32(static_cast<std::uint32_t>(cfg.n_s));
  w.u32(static_cast<std::uint32_t>(cfg.n_d));
  w.u8(static_cast<std::uint8_t>(cfg.diagonal));
  w.u64(sol.stokes_dofs.size());
  w.f64s(sol.stokes_dofs);
  w.u64(sol.head_dofs.size());
  w.f64s(sol.head_dofs);
  write_file(path, w.bytes());
}

CoupledSolution load_reference(const ReferenceConfig& cfg, const std::string& path) {
  const auto bytes = read_file(path);
  ByteReader r(bytes);
  if (!r.magic(kMagic)) throw CorruptFileError(path + ": not a reference file");
  if (r.u32() != kVersion) throw CorruptFileError(path + ": unsupported version");
  if (r.u64() != reference_hash(cfg)) throw CorruptFileError(path + ": config hash mismatch");
  if (static_cast<int>(r.u32()) != cfg.n_s || static_cast<int>(r.u32()) != cfg.n_d ||
      r.u8() != static_cast<std::uint8_t>(cfg.diagonal))
    throw CorruptFileError(path + ": mesh header mismatch");
  const auto ns = r.u64();
  auto stokes = r.f64s(ns);
  const auto nd = r.u64();
  auto head = r.f64s(nd);
  if (r.remaining() != 0) throw CorruptFileError(path + ": trailing bytes");
  auto sol = wrap_reference(cfg, std::move(stokes), std::move(head));
  const auto& th = static_cast<const TaylorHoodField&>(*sol.flow);
  if (static_cast<int>(sol.stokes_dofs.size()) != th.layout().size() ||
      static_cast<int>(sol.head_dofs.size()) != build_p2_dofs(sol.head->mesh()).num_dofs)
    throw CorruptFileError(path + ": vector sizes do not match the meshes");
  return sol;
}

CoupledSolution cached_reference(const ReferenceConfig& cfg, const std::string& dir, bool* hit) {
  const std::string path = reference_cache_path(cfg, dir);
  if (std::filesystem::exists(path)) {
    if (hit) *hit = true;
    return load_reference(cfg, path);
  }
  if (hit) *hit = false;
  auto sol = reference_solve(cfg);
  std::filesystem::create_directories(dir);
  const std::string tmp = path + ".tmp";
  save_reference(cfg, sol, tmp);
  std::filesystem::rename(tmp, path);
  return sol;
}

P2HeadField::P2HeadField(std::shared_ptr<const TriMesh> mesh, std::shared_ptr<const P2DofMap> dofs, Vector values)
    : mesh_(std::move(mesh)), dofs_(std::move(dofs)), values_(std::move(values)) {
  if (static_cast<int>(values_.size()) != dofs_->num_dofs) throw std::invalid_argument("P2 head vector size does not match the mesh");
}

HeadSample P2HeadField::eval(Point p, double tol) const {
  const auto loc = mesh_->locate(p, tol);
  return eval_in(loc.triangle, loc.bary);
}

HeadSample P2HeadField::eval_in(int tri, const std::array<double, 3>& bary) const {
  const auto geo = p1_gradients(mesh_->corners(tri));
  const auto v = p2_values(bary);
  const auto g = p2_gradients(bary, geo.grad);
  HeadSample s{0.0, {0.0, 0.0}};
  for (int i = 0; i < 6; ++i) {
    const double c = values_[dofs_->cell[tri][i]];
    s.value += c * v[i];
    s.grad[0] += c * g[i][0];
    s.grad[1] += c * g[i][1];
  }
  return s;
}

namespace {

// Sub-triangles of a uniform s-refinement, as parent barycentric corners.
std::vector<std::array<std::array<double, 3>, 3>> subdivision(int s) {
  std::vector<std::array<std::array<double, 3>, 3>> out;
  auto b = [s](int a, int c) { return std::array<double, 3>{double(s - a - c) / s, double(a) / s, double(c) / s}; };
  for (int j = 0; j < s; ++j)
    for (int i = 0; i + j < s; ++i) {
      out.push_back({b(i, j), b(i + 1, j), b(i, j + 1)});
      if (i + j + 1 < s) out.push_back({b(i + 1, j), b(i + 1, j + 1), b(i, j + 1)});
    }
  return out;
}

int subdivision_factor(double ref_h, double num_res) {
  return num_res < ref_h ? static_cast<int>(std::ceil(ref_h / num_res - 1e-9)) : 1;
}

// Σ over reference triangles in fixed-size chunks; chunk sums are combined in order.
template <int K, class F>
std::array<double, K> chunked_sum(int count, int workers, F&& f) {
  constexpr int kChunk = 256;
  const int chunks = (count + kChunk - 1) / kChunk;
  std::vector<std::array<double, K>> partial(chunks, std::array<double, K>{});
  std::atomic<int> next{0};
  auto run = [&] {
    for (int c; (c = next.fetch_add(1)) < chunks;) {
      std::array<double, K> acc{};
      for (int t = c * kChunk; t < std::min(count, (c + 1) * kChunk); ++t) f(t, acc);
      partial[c] = acc;
    }
  };
  {
    std::vector<std::jthread> pool;
    for (int w = 1; w < std::max(1, workers); ++w) pool.emplace_back(run);
    run();
  }
  std::array<double, K> total{};
  for (const auto& p : partial)
    for (int k = 0; k < K; ++k) total[k] += p[k];
  return total;
}

}  // namespace

ErrorReport error_norms(const CoupledSolution& numerical, const CoupledSolution& reference, int workers) {
  const auto& rs = reference.flow->mesh();
  const auto& rd = reference.head->mesh();
  if (!(numerical.flow->mesh().rect() == rs.rect()) || !(numerical.head->mesh().rect() == rd.rect()))
    throw std::invalid_argument("error_norms: solutions cover different subdomains");
  const auto& q = quad_triangle(6);
  ErrorReport r;
  r.h = numerical.flow->mesh().h();
  r.mode = numerical.info.method;

  {
    const auto sub = subdivision(subdivision_factor(rs.h(), numerical.flow->mesh().h()));
    const auto sum = chunked_sum<2>(static_cast<int>(rs.num_triangles()), workers, [&](int t, std::array<double, 2>& acc) {
      const auto c = rs.corners(t);
      const double area = p1_gradients(c).area / sub.size();
      for (const auto& st : sub)
        for (std::size_t k = 0; k < q.size(); ++k) {
          std::array<double, 3> l{};
          for (int i = 0; i < 3; ++i) l[i] = q.points[k][0] * st[0][i] + q.points[k][1] * st[1][i] + q.points[k][2] * st[2][i];
          const Point x = map_point(c, l);
          const auto a = reference.flow->eval_in(t, l);
          const auto b = numerical.flow->eval(x);
          const double w = 2 * area * q.weights[k];
          for (int comp = 0; comp < 2; ++comp) {
            acc[0] += w * (a.u[comp] - b.u[comp]) * (a.u[comp] - b.u[comp]);
            for (int d = 0; d < 2; ++d) acc[1] += w * (a.grad[comp][d] - b.grad[comp][d]) * (a.grad[comp][d] - b.grad[comp][d]);
          }
        }
    });
    r.u_l2 = std::sqrt(sum[0]);
    r.u_h1_semi = std::sqrt(sum[1]);
    r.u_h1 = std::sqrt(sum[0] + sum[1]);
  }
  {
    const auto sub = subdivision(subdivision_factor(rd.h(), numerical.head->resolution()));
    const auto sum = chunked_sum<2>(static_cast<int>(rd.num_triangles()), workers, [&](int t, std::array<double, 2>& acc) {
      const auto c = rd.corners(t);
      const double area = p1_gradients(c).area / sub.size();
      for (const auto& st : sub)
        for (std::size_t k = 0; k < q.size(); ++k) {
          std::array<double, 3> l{};
          for (int i = 0; i < 3; ++i) l[i] = q.points[k][0] * st[0][i] + q.points[k][1] * st[1][i] + q.points[k][2] * st[2][i];
          const Point x = map_point(c, l);
          const auto a = reference.head->eval_in(t, l);
          const auto b = numerical.head->eval(x);
          const double w = 2 * area * q.weights[k];
          acc[0] += w * (a.value - b.value) * (a.value - b.value);
          for (int d = 0; d < 2; ++d) acc[1] += w * (a.grad[d] - b.grad[d]) * (a.grad[d] - b.grad[d]);
        }
    });
    r.phi_l2 = std::sqrt(sum[0]);
    r.phi_h1_semi = std::sqrt(sum[1]);
    r.phi_h1 = std::sqrt(sum[0] + sum[1]);
  }
  return r;
}

std::vector<std::optional<double>> convergence_orders(std::span<const double> errors, std::span<const double> hs) {
  if (errors.size() != hs.size()) throw std::invalid_argument("convergence_orders: size mismatch");
  std::vector<std::optional<double>> out;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(hs[i] < hs[i - 1])) throw std::invalid_argument("convergence_orders: h must be strictly decreasing");
    if (errors[i] > 0.0 && errors[i - 1] > 0.0)
      out.push_back(std::log(errors[i - 1] / errors[i]) / std::log(hs[i - 1] / hs[i]));
    else
      out.push_back(std::nullopt);
  }
  return out;
}

}  // namespace sdms
