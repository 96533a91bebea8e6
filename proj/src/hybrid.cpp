#include "geomatch/hybrid.hpp"

#include "flow_kernels.hpp"
#include "geomatch/error.hpp"

namespace geomatch {

namespace {

using detail::Flat;

struct Mesh {
  std::vector<int> cells;
  int arity;
  int dim;
};

Mesh mesh_of(const SimplicialShape& shape, StiffnessVariant variant) {
  if (variant == StiffnessVariant::tangential && shape.kind() != ShapeKind::curve) {
    throw Error("the tangential stiffness variant applies to curves only");
  }
  const Cells& c = shape.simplices();
  return {std::vector<int>(c.data(), c.data() + c.size()), static_cast<int>(c.cols()), shape.dim()};
}

detail::QuadVariant quad_variant(StiffnessVariant v) {
  return v == StiffnessVariant::full ? detail::QuadVariant::full : detail::QuadVariant::tangential;
}

Flat<double> flat(const Points& p) { return Flat<double>(p.data(), p.data() + p.size()); }

Points points(const Flat<double>& v, int d) {
  Points out(static_cast<int>(v.size()) / d, d);
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

void check_field(const Points& q, const Points& h) {
  if (q.rows() != h.rows() || q.cols() != h.cols()) {
    throw DimensionMismatch("vector field does not match the vertex array");
  }
}

double quadform(const Points& q, const Points& h, const Mesh& mesh, StiffnessVariant variant,
                Points* gq, Points* gh) {
  check_field(q, h);
  const int d = mesh.dim;
  Flat<double> fq = flat(q), fh = flat(h);
  Flat<double> bq(gq ? fq.size() : 0, 0.0), bh(gh ? fh.size() : 0, 0.0);
  const double val = detail::intrinsic_quadform_t(fq, fh, d, mesh.cells, mesh.arity,
                                                  quad_variant(variant), gq ? &bq : nullptr,
                                                  gh ? &bh : nullptr);
  if (gq) *gq = points(bq, d);
  if (gh) *gh = points(bh, d);
  return val;
}

double lagrangian_grad(const Points& q, const Points& a, const Mesh& mesh,
                       const DeformationKernel& kernel, const IntrinsicStiffness& stiff,
                       Points* grad_q, Points* grad_a) {
  if (!grad_q) {
    const Points v = lddmm_velocity(q, a, kernel);
    const double outer = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size())
                             .dot(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    return outer + stiff.weight * quadform(q, v, mesh, stiff.variant, nullptr, nullptr);
  }
  const double outer = lddmm_lagrangian_grad(q, a, kernel, *grad_q, *grad_a);
  const Points v = 0.5 * (*grad_a);
  Points gq_form, gh_form;
  const double inner = quadform(q, v, mesh, stiff.variant, &gq_form, &gh_form);
  Points vjp_q, vjp_a;
  lddmm_velocity_vjp(q, a, gh_form, kernel, vjp_q, vjp_a);
  *grad_q += stiff.weight * (gq_form + vjp_q);
  *grad_a += stiff.weight * vjp_a;
  return outer + stiff.weight * inner;
}

// Hamiltonian gradient; `a_out` receives the control generated by p.
template <class T>
T hamiltonian_grad_t(const Flat<T>& q, const Flat<T>& p, const Mesh& mesh, double sigma,
                     const IntrinsicStiffness& stiff, Flat<T>& hq, Flat<T>& hp, Flat<T>* a_out) {
  using std::exp;
  const int d = mesh.dim;
  const int n = static_cast<int>(q.size()) / d;
  const int m = n * d;
  const auto qv = quad_variant(stiff.variant);
  Flat<T> a;
  if (stiff.weight == 0.0) {
    a = p;
  } else {
    const double inv_s2 = 1.0 / (sigma * sigma);
    Flat<T> kmat(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        T r2(0.0);
        for (int c = 0; c < d; ++c) {
          const T diff = q[i * d + c] - q[j * d + c];
          r2 += diff * diff;
        }
        kmat[i * n + j] = exp(-r2 * inv_s2);
      }
    }
    // Columns of I + weight * Lambda K, using grad_h Q = 2 Lambda h.
    Flat<T> sys(static_cast<std::size_t>(m) * m, T(0.0));
    Flat<T> field(m), grad(m);
    for (int col = 0; col < m; ++col) {
      const int j = col / d, r = col % d;
      std::fill(field.begin(), field.end(), T(0.0));
      for (int i = 0; i < n; ++i) field[i * d + r] = kmat[i * n + j];
      std::fill(grad.begin(), grad.end(), T(0.0));
      detail::intrinsic_quadform_t<T>(q, field, d, mesh.cells, mesh.arity, qv, nullptr, &grad);
      for (int row = 0; row < m; ++row) sys[row * m + col] = 0.5 * stiff.weight * grad[row];
      sys[col * m + col] += 1.0;
    }
    a = detail::dense_solve(std::move(sys), p, m);
  }
  hp = detail::kernel_apply(q, a, n, d, sigma);
  hq = detail::kernel_bilinear_grad_q(q, a, a, n, d, sigma);
  for (auto& x : hq) x = 0.5 * x;
  if (stiff.weight != 0.0) {
    Flat<T> gq(m, T(0.0));
    detail::intrinsic_quadform_t<T>(q, hp, d, mesh.cells, mesh.arity, qv, &gq, nullptr);
    for (int i = 0; i < m; ++i) hq[i] -= 0.5 * stiff.weight * gq[i];
  }
  T value(0.0);
  for (int i = 0; i < m; ++i) value += p[i] * hp[i];
  if (a_out) *a_out = std::move(a);
  return 0.5 * value;
}

}  // namespace

double intrinsic_quadform(const SimplicialShape& q, const Points& h, StiffnessVariant variant) {
  return quadform(q.vertices(), h, mesh_of(q, variant), variant, nullptr, nullptr);
}

double intrinsic_quadform_grad(const SimplicialShape& q, const Points& h, StiffnessVariant variant,
                               Points& grad_q, Points& grad_h) {
  return quadform(q.vertices(), h, mesh_of(q, variant), variant, &grad_q, &grad_h);
}

double hybrid_lagrangian(const SimplicialShape& q, const Points& a, const DeformationKernel& kernel,
                         const IntrinsicStiffness& stiffness) {
  return lagrangian_grad(q.vertices(), a, mesh_of(q, stiffness.variant), kernel, stiffness,
                         nullptr, nullptr);
}

double hybrid_lagrangian_grad(const SimplicialShape& q, const Points& a,
                              const DeformationKernel& kernel, const IntrinsicStiffness& stiffness,
                              Points& grad_q, Points& grad_a) {
  return lagrangian_grad(q.vertices(), a, mesh_of(q, stiffness.variant), kernel, stiffness, &grad_q,
                         &grad_a);
}

FlowModel hybrid_flow_model(const SimplicialShape& shape, const DeformationKernel& kernel,
                            const IntrinsicStiffness& stiffness) {
  if (stiffness.weight < 0.0) throw Error("hybrid weight must be nonnegative");
  const Mesh mesh = mesh_of(shape, stiffness.variant);
  const int d = shape.dim();
  FlowModel m;
  m.kernel = kernel;
  m.lagrangian = [=](const Points& q, const Points& a, Points* gq, Points* ga) {
    return lagrangian_grad(q, a, mesh, kernel, stiffness, gq, ga);
  };
  m.hamiltonian_grad = [=](const Points& q, const Points& p, Points& hq, Points& hp) {
    Flat<double> fq, fp;
    hamiltonian_grad_t<double>(flat(q), flat(p), mesh, kernel.sigma, stiffness, fq, fp, nullptr);
    hq = points(fq, d);
    hp = points(fp, d);
  };
  m.hamiltonian = [=](const Points& q, const Points& p) {
    Flat<double> fq, fp;
    return hamiltonian_grad_t<double>(flat(q), flat(p), mesh, kernel.sigma, stiffness, fq, fp, nullptr);
  };
  m.hamiltonian_hvp = [=](const Points& q, const Points& p, const Points& dq, const Points& dp,
                          Points& oq, Points& op) {
    const auto size = static_cast<std::size_t>(q.size());
    Flat<Dual> sq(size), sp(size);
    for (std::size_t i = 0; i < size; ++i) {
      sq[i] = Dual(q.data()[i], dq.data()[i]);
      sp[i] = Dual(p.data()[i], dp.data()[i]);
    }
    Flat<Dual> hq, hp;
    hamiltonian_grad_t<Dual>(sq, sp, mesh, kernel.sigma, stiffness, hq, hp, nullptr);
    oq.resize(q.rows(), d);
    op.resize(q.rows(), d);
    for (std::size_t i = 0; i < size; ++i) {
      oq.data()[i] = hq[i].d;
      op.data()[i] = hp[i].d;
    }
  };
  m.control_from_momentum = [=](const Points& q, const Points& p) {
    Flat<double> fq, fp, a;
    hamiltonian_grad_t<double>(flat(q), flat(p), mesh, kernel.sigma, stiffness, fq, fp, &a);
    return points(a, d);
  };
  m.split = [=](const Points& q, const Points& a) {
    const Points v = lddmm_velocity(q, a, kernel);
    const double outer = Eigen::Map<const Eigen::VectorXd>(a.data(), a.size())
                             .dot(Eigen::Map<const Eigen::VectorXd>(v.data(), v.size()));
    return std::pair{outer, stiffness.weight * quadform(q, v, mesh, stiffness.variant, nullptr, nullptr)};
  };
  return m;
}

MatchReport match_hybrid(const SimplicialShape& source, const SimplicialShape& target,
                         const MatchConfig& cfg) {
  const MatchConfig resolved = cfg.resolved(source, target);
  const IntrinsicStiffness stiffness{resolved.hybrid.weight, resolved.hybrid.variant};
  return match_flow(source, target, resolved,
                    hybrid_flow_model(source, DeformationKernel(resolved.flow.sigma), stiffness));
}

}  // namespace geomatch
