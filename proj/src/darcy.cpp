#include "sdms/darcy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "sdms/binio.hpp"

namespace sdms {

namespace {

constexpr std::uint32_t kBasisVersion = 1;

std::string source_suffix(const ScalarSource& source) {
  return source ? ";src=" + source.id : std::string();
}

}  // namespace

std::string BasisFingerprint::describe() const {
  std::ostringstream os;
  os << "N=" << n << " M=" << m << " rect=[" << rect.x0 << "," << rect.x1 << "]x[" << rect.y0 << "," << rect.y1
     << "] diagonal=" << (diagonal == Diagonal::NE ? "NE" : "NW") << " eps=" << epsilon << " coeff=" << coefficient_id;
  return os.str();
}

BasisFingerprint fingerprint_for(const TriMesh& mesh, const CoefficientField& coeff, int m, const ScalarSource& source) {
  BasisFingerprint fp;
  fp.n = mesh.n();
  fp.m = m;
  fp.rect = mesh.rect();
  fp.diagonal = mesh.diagonal();
  fp.epsilon = coeff.epsilon();
  fp.coefficient_id = coeff.id() + source_suffix(source);
  return fp;
}

LocalBasis compute_local_basis(const TriMesh& mesh, int tri_id, const CoefficientField& coeff, int m,
                               const ScalarSource& source) {
  if (m < 1) throw BasisError("refinement factor must be at least 1");
  const FineSubmesh sub = refine_triangle(mesh, tri_id, m);
  const int nv = static_cast<int>(sub.vertices.size());
  const QuadRule& rule = quad_triangle(2);

  CooAccumulator acc(nv, nv);
  acc.reserve(sub.triangles.size() * 9);
  std::vector<double> kq(rule.size());
  for (const auto& t : sub.triangles) {
    const std::array<Point, 3> c{sub.vertices[t[0]], sub.vertices[t[1]], sub.vertices[t[2]]};
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point p = map_point(c, rule.points[q]);
      kq[q] = coeff.checked(p.x, p.y);
    }
    const Mat3 k = local_p1_stiffness(c, rule, kq);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) acc.add(t[i], t[j], k[i][j]);
  }
  const SparseMatrix a = acc.finalize();

  LocalBasis out;
  out.parent = tri_id;
  out.m = m;
  for (int i = 0; i < 3; ++i) {
    out.eta[i].resize(nv);
    for (int v = 0; v < nv; ++v) out.eta[i][v] = sub.bary[v][i];
  }

  std::vector<int> interior_index(nv, -1);
  std::vector<int> interior;
  for (int v = 0; v < nv; ++v) {
    if (!sub.on_boundary(v)) {
      interior_index[v] = static_cast<int>(interior.size());
      interior.push_back(v);
    }
  }
  if (!interior.empty()) {
    const int ni = static_cast<int>(interior.size());
    std::vector<int> rp{0}, ci;
    std::vector<double> vals;
    for (int v : interior) {
      for (int k = a.row_ptr()[v]; k < a.row_ptr()[v + 1]; ++k) {
        const int c = interior_index[a.col_idx()[k]];
        if (c < 0) continue;
        ci.push_back(c);
        vals.push_back(a.values()[k]);
      }
      rp.push_back(static_cast<int>(ci.size()));
    }
    const SparseLdlt solver(SparseMatrix(ni, ni, std::move(rp), std::move(ci), std::move(vals)));
    for (int i = 0; i < 3; ++i) {
      // Boundary values are the parent hats; lift them to the interior.
      Vector lifted(nv, 0.0);
      for (int v = 0; v < nv; ++v)
        if (sub.on_boundary(v)) lifted[v] = sub.bary[v][i];
      const Vector ag = a * lifted;
      Vector rhs(ni);
      for (int r = 0; r < ni; ++r) rhs[r] = -ag[interior[r]];
      const Vector x = solver.solve(rhs);
      for (int r = 0; r < ni; ++r) out.eta[i][interior[r]] = x[r];
    }
  }

  std::array<Vector, 3> a_eta;
  for (int i = 0; i < 3; ++i) a_eta[i] = a * out.eta[i];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out.stiffness[i][j] = dot(out.eta[i], a_eta[j]);
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) {
      const double s = 0.5 * (out.stiffness[i][j] + out.stiffness[j][i]);
      out.stiffness[i][j] = out.stiffness[j][i] = s;
    }

  if (source) {
    for (const auto& t : sub.triangles) {
      const std::array<Point, 3> c{sub.vertices[t[0]], sub.vertices[t[1]], sub.vertices[t[2]]};
      const double area = p1_gradients(c).area;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point p = map_point(c, rule.points[q]);
        const double fq = source.f(p.x, p.y) * 2.0 * area * rule.weights[q];
        for (int i = 0; i < 3; ++i) {
          double v = 0.0;
          for (int k = 0; k < 3; ++k) v += rule.points[q][k] * out.eta[i][t[k]];
          out.load[i] += fq * v;
        }
      }
    }
  }
  return out;
}

MsBasisSet offline_build(const TriMesh& mesh, const CoefficientField& coeff, int m, int workers,
                         const ScalarSource& source) {
  MsBasisSet set;
  set.fingerprint = fingerprint_for(mesh, coeff, m, source);
  const int nt = static_cast<int>(mesh.num_triangles());
  set.elements.resize(nt);
  workers = std::clamp(workers, 1, std::max(1, nt));

  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  int first_error_tri = -1;
  auto run = [&] {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= nt || failed.load()) return;
      try {
        set.elements[t] = compute_local_basis(mesh, t, coeff, m, source);
      } catch (...) {
        std::lock_guard lock(err_mutex);
        if (!first_error || t < first_error_tri) {
          first_error = std::current_exception();
          first_error_tri = t;
        }
        failed = true;
      }
    }
  };
  if (workers == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  if (first_error) {
    try {
      std::rethrow_exception(first_error);
    } catch (const EllipticityError& e) {
      throw EllipticityError("local problem on coarse triangle " + std::to_string(first_error_tri) + ": " + e.what());
    } catch (const std::exception& e) {
      throw BasisError("local problem on coarse triangle " + std::to_string(first_error_tri) + " failed: " + e.what());
    }
  }
  return set;
}

BasisAudit audit_basis(const MsBasisSet& set, double tol) {
  BasisAudit r;
  r.min_eta = 1e300;
  r.max_eta = -1e300;
  const int m = set.m();
  for (const auto& el : set.elements) {
    const int nv = static_cast<int>(el.fine_vertex_count());
    if (nv != FineSubmesh::vertex_count(m))
      throw BasisInvariantError("triangle " + std::to_string(el.parent) + " has wrong fine vertex count");
    for (int b = 0; b <= m; ++b)
      for (int a = 0; a + b <= m; ++a) {
        const int v = FineSubmesh::index(m, a, b);
        const std::array<double, 3> lam{double(m - a - b) / m, double(a) / m, double(b) / m};
        const bool boundary = a == 0 || b == 0 || a + b == m;
        double sum = 0.0;
        for (int i = 0; i < 3; ++i) {
          const double e = el.eta[i][v];
          sum += e;
          r.min_eta = std::min(r.min_eta, e);
          r.max_eta = std::max(r.max_eta, e);
          if (boundary) r.boundary_trace = std::max(r.boundary_trace, std::abs(e - lam[i]));
        }
        r.partition_of_unity = std::max(r.partition_of_unity, std::abs(sum - 1.0));
      }
    const int corners[3] = {FineSubmesh::index(m, 0, 0), FineSubmesh::index(m, m, 0), FineSubmesh::index(m, 0, m)};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k)
        r.corner_delta = std::max(r.corner_delta, std::abs(el.eta[i][corners[k]] - (i == k ? 1.0 : 0.0)));
    double scale = 0.0;
    for (int i = 0; i < 3; ++i) scale = std::max(scale, std::abs(el.stiffness[i][i]));
    scale = std::max(scale, 1e-300);
    for (int i = 0; i < 3; ++i) {
      double row = 0.0;
      for (int j = 0; j < 3; ++j) {
        row += el.stiffness[i][j];
        r.stiffness_asymmetry = std::max(r.stiffness_asymmetry, std::abs(el.stiffness[i][j] - el.stiffness[j][i]) / scale);
      }
      r.stiffness_row_sum = std::max(r.stiffness_row_sum, std::abs(row) / scale);
    }
  }
  if (set.elements.empty()) r.min_eta = r.max_eta = 0.0;
  auto check = [&](double v, const char* what) {
    if (!(v <= tol)) {
      std::ostringstream os;
      os << what << " deviation " << v << " exceeds " << tol;
      throw BasisInvariantError(os.str());
    }
  };
  check(r.partition_of_unity, "partition of unity");
  check(r.boundary_trace, "boundary trace");
  check(r.corner_delta, "corner value");
  check(r.stiffness_asymmetry, "stiffness symmetry");
  check(r.stiffness_row_sum, "stiffness row sum");
  return r;
}

std::vector<std::uint8_t> serialize_basis(const MsBasisSet& set) {
  ByteWriter w;
  w.magic("MSFB");
  w.u32(kBasisVersion);
  const auto& fp = set.fingerprint;
  w.u32(static_cast<std::uint32_t>(fp.n));
  w.u32(static_cast<std::uint32_t>(fp.m));
  w.f64(fp.rect.x0);
  w.f64(fp.rect.y0);
  w.f64(fp.rect.x1);
  w.f64(fp.rect.y1);
  w.u8(static_cast<std::uint8_t>(fp.diagonal));
  w.f64(fp.epsilon);
  w.str(fp.coefficient_id);
  w.u32(static_cast<std::uint32_t>(set.elements.size()));
  for (const auto& el : set.elements) {
    w.u32(static_cast<std::uint32_t>(el.fine_vertex_count()));
    for (int i = 0; i < 3; ++i) w.f64s(el.eta[i]);
    for (int i = 0; i < 3; ++i) w.f64s(el.stiffness[i]);
    w.f64s(el.load);
  }
  return w.take();
}

MsBasisSet deserialize_basis(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (!r.magic("MSFB")) throw CorruptFileError("not a basis cache (bad magic)");
  const std::uint32_t version = r.u32();
  if (version != kBasisVersion) throw CorruptFileError("unsupported basis cache version " + std::to_string(version));
  MsBasisSet set;
  auto& fp = set.fingerprint;
  fp.n = static_cast<int>(r.u32());
  fp.m = static_cast<int>(r.u32());
  fp.rect.x0 = r.f64();
  fp.rect.y0 = r.f64();
  fp.rect.x1 = r.f64();
  fp.rect.y1 = r.f64();
  const std::uint8_t diag = r.u8();
  if (diag > 1) throw CorruptFileError("bad diagonal flag");
  fp.diagonal = static_cast<Diagonal>(diag);
  fp.epsilon = r.f64();
  fp.coefficient_id = r.str();
  if (fp.n < 1 || fp.m < 1 || fp.m > 1 << 14) throw CorruptFileError("bad mesh parameters in basis cache");
  const std::uint32_t count = r.u32();
  if (count != 2ull * fp.n * fp.n) throw CorruptFileError("basis cache record count does not match N");
  const std::uint32_t nv = static_cast<std::uint32_t>(FineSubmesh::vertex_count(fp.m));
  set.elements.resize(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    auto& el = set.elements[t];
    el.parent = static_cast<int>(t);
    el.m = fp.m;
    if (r.u32() != nv) throw CorruptFileError("basis cache record " + std::to_string(t) + " has wrong size");
    for (int i = 0; i < 3; ++i) el.eta[i] = r.f64s(nv);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) el.stiffness[i][j] = r.f64();
    for (int i = 0; i < 3; ++i) el.load[i] = r.f64();
  }
  if (r.remaining() != 0) throw CorruptFileError("trailing bytes in basis cache");
  return set;
}

void save_basis(const MsBasisSet& set, const std::string& path) { write_file(path, serialize_basis(set)); }

MsBasisSet load_basis(const std::string& path, const BasisFingerprint* expected) {
  const auto bytes = read_file(path);
  MsBasisSet set = deserialize_basis(bytes);
  if (expected && !(set.fingerprint == *expected))
    throw FingerprintMismatchError("basis cache " + path + " was built for " + set.fingerprint.describe() +
                                   ", expected " + expected->describe());
  audit_basis(set, 1e-9);
  return set;
}

DarcyOperators darcy_operators(const TriMesh& mesh, const MsBasisSet& basis) {
  const int nv = static_cast<int>(mesh.num_vertices());
  if (basis.elements.size() != mesh.num_triangles())
    throw BasisError("basis has " + std::to_string(basis.elements.size()) + " elements, mesh has " +
                     std::to_string(mesh.num_triangles()) + " triangles");
  const int m = basis.m();
  DarcyOperators ops;
  ops.load.assign(nv, 0.0);
  CooAccumulator stiff(nv, nv), mass(nv, nv);
  stiff.reserve(mesh.num_triangles() * 9);
  mass.reserve(mesh.num_triangles() * 9);

  // Fine triangles of the uniform refinement, as vertex triples.
  std::vector<Triangle> fine;
  for (int b = 0; b < m; ++b)
    for (int a = 0; a + b < m; ++a) {
      fine.push_back({FineSubmesh::index(m, a, b), FineSubmesh::index(m, a + 1, b), FineSubmesh::index(m, a, b + 1)});
      if (a + b + 1 < m)
        fine.push_back(
            {FineSubmesh::index(m, a + 1, b), FineSubmesh::index(m, a + 1, b + 1), FineSubmesh::index(m, a, b + 1)});
    }

  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto& el = basis.elements[t];
    const double fine_area = p1_gradients(mesh.corners(static_cast<int>(t))).area / (double(m) * m);
    Mat3 mloc{};
    for (const auto& f : fine) {
      std::array<double, 3> s{};
      for (int i = 0; i < 3; ++i) s[i] = el.eta[i][f[0]] + el.eta[i][f[1]] + el.eta[i][f[2]];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          double d = 0.0;
          for (int k = 0; k < 3; ++k) d += el.eta[i][f[k]] * el.eta[j][f[k]];
          mloc[i][j] += fine_area / 12.0 * (s[i] * s[j] + d);
        }
    }
    for (int i = 0; i < 3; ++i) {
      ops.load[tri[i]] += el.load[i];
      for (int j = 0; j < 3; ++j) {
        stiff.add(tri[i], tri[j], el.stiffness[i][j]);
        mass.add(tri[i], tri[j], mloc[i][j]);
      }
    }
  }
  ops.stiffness = stiff.finalize();
  ops.mass = mass.finalize();

  ops.trace = interface_trace(mesh);
  CooAccumulator gm(nv, nv);
  for (const auto& e : ops.trace.edges) {
    const int a = ops.trace.vertices[e[0]], b = ops.trace.vertices[e[1]];
    const double len = std::hypot(mesh.vertices()[b].x - mesh.vertices()[a].x, mesh.vertices()[b].y - mesh.vertices()[a].y);
    const auto me = edge_p1_mass(len);
    const int idx[2] = {a, b};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) gm.add(idx[i], idx[j], me[i][j]);
  }
  ops.interface_mass = gm.finalize();
  ops.dirichlet = mesh.vertices_with_marker(BoundaryMarker::darcy_exterior);
  return ops;
}

Vector darcy_rhs(const DarcyOperators& ops, double gamma_p, std::span<const double> eta_p) {
  if (eta_p.size() != ops.trace.size()) throw std::invalid_argument("eta_p size does not match the interface trace");
  const int nv = ops.stiffness.rows();
  Vector full(nv, 0.0);
  for (std::size_t k = 0; k < eta_p.size(); ++k) full[ops.trace.vertices[k]] = eta_p[k];
  Vector rhs = ops.interface_mass * full;
  axpy(gamma_p, ops.load, rhs);
  for (int i = 0; i < nv; ++i)
    if (ops.dirichlet[i]) rhs[i] = 0.0;
  return rhs;
}

LinearSystem assemble_darcy(const DarcyOperators& ops, double g, double gamma_p, std::span<const double> eta_p) {
  LinearSystem sys;
  sys.matrix = add(ops.stiffness, ops.interface_mass, gamma_p, g);
  sys.rhs = darcy_rhs(ops, gamma_p, eta_p);
  const Vector zeros(sys.rhs.size(), 0.0);
  apply_dirichlet(sys.matrix, sys.rhs, ops.dirichlet, zeros);
  return sys;
}

DarcyEvaluator::DarcyEvaluator(std::shared_ptr<const TriMesh> mesh, std::shared_ptr<const MsBasisSet> basis,
                               Vector head, Mode mode)
    : mesh_(std::move(mesh)), basis_(std::move(basis)), head_(std::move(head)), mode_(mode) {
  if (head_.size() != mesh_->num_vertices()) throw std::invalid_argument("head size does not match the mesh");
  if (mode_ == Mode::composite && (!basis_ || basis_->elements.size() != mesh_->num_triangles()))
    throw std::invalid_argument("composite evaluation needs a basis for every triangle");
  geometry_.reserve(mesh_->num_triangles());
  for (std::size_t t = 0; t < mesh_->num_triangles(); ++t) geometry_.push_back(p1_gradients(mesh_->corners(static_cast<int>(t))));
}

HeadSample DarcyEvaluator::eval(Point p, double tol) const {
  const Location loc = mesh_->locate(p, tol);
  return eval_in(loc.triangle, loc.bary);
}

HeadSample DarcyEvaluator::eval_in(int tri, const std::array<double, 3>& bary) const {
  const auto& t = mesh_->triangles()[tri];
  const auto& geo = geometry_[tri];
  const int m = basis_ ? basis_->m() : 1;
  Sample s{0.0, {0.0, 0.0}};
  if (mode_ == Mode::coarse_p1 || m == 1) {
    for (int i = 0; i < 3; ++i) {
      s.value += head_[t[i]] * bary[i];
      s.grad[0] += head_[t[i]] * geo.grad[i][0];
      s.grad[1] += head_[t[i]] * geo.grad[i][1];
    }
    return s;
  }
  const auto& el = basis_->elements[tri];
  const FineLocation fl = locate_in_refinement(m, bary);
  std::array<double, 3> f{};
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 3; ++i) f[k] += head_[t[i]] * el.eta[i][fl.vertices[k]];
  for (int k = 0; k < 3; ++k) s.value += fl.bary[k] * f[k];
  double ds, dt;
  if (fl.upward) {
    ds = f[1] - f[0];
    dt = f[2] - f[0];
  } else {
    dt = f[1] - f[0];
    ds = f[1] - f[2];
  }
  s.grad[0] = m * (ds * geo.grad[1][0] + dt * geo.grad[2][0]);
  s.grad[1] = m * (ds * geo.grad[1][1] + dt * geo.grad[2][1]);
  return s;
}

}  // namespace sdms
