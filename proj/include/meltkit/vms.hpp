#pragma once

// Residual-based variational multiscale assembly of the coupled momentum /
// continuity / temperature / level-set system on linear tetrahedra.
//
// Unknown layout follows the Jacobian block structure (u, p, T, phi); the
// Newton unknowns are the rate increments for u, T, phi and the end-of-step
// pressure, so Jacobians are assembled as
//   J = c_rate dR/d(rates) + c_val dR/d(values),   dR/dp directly.
// Galerkin terms use a 4-point rule; tau-weighted fine-scale terms default to
// the element midpoint (switchable to the full rule).

#include "meltkit/materials.hpp"
#include "meltkit/physics.hpp"
#include "meltkit/precond.hpp"

namespace meltkit {

struct State {
  VectorField u;
  ScalarField p, T, phi;
  VectorField u_dot;
  ScalarField T_dot, phi_dot;

  State() = default;
  explicit State(const Mesh& m)
      : u(m), p(m), T(m), phi(m), u_dot(m), T_dot(m), phi_dot(m) {}
};

struct StabilizationParams {
  double tau_M = 0.0, tau_C = 0.0, tau_T = 0.0, tau_phi = 0.0;
};

StabilizationParams stabilization_params(double h, double dt, const Vec3& u,
                                         double rho, double mu, double kappa,
                                         double cp);

// Fine-scale fields from the strong residuals (negated tau scalings).
struct FineScale {
  Vec3 u_prime = Vec3::Zero();
  double p_prime = 0.0, T_prime = 0.0, phi_prime = 0.0;
};
FineScale fine_scale(const Vec3& r_M, double r_C, double r_T, double r_phi,
                     const StabilizationParams& tau, double rho);

// Which equation blocks are assembled/solved. Inactive fields keep their
// stored values and contribute no rows.
struct ActiveFields {
  bool flow = true;         // momentum + continuity (u, p)
  bool temperature = true;  // T
  bool levelset = true;     // phi
};

struct VmsModel {
  PhaseProperties props;
  BlendParams blend;  // rho_m, rho_g for the density-scaled delta
  double T_s = 0.0, T_l = 0.0;
  double L_m = 0.0;
  SurfaceForceModel surface;
  const EvaporationModel* evap = nullptr;
  HeatSourceModel heat;
  bool interface_forces = true;  // CSF terms on/off (off for single phase)
  Vec3 gravity = Vec3::Zero();
  double c_eps = 1.5;   // eps = c_eps * element h
  double dt = 1.0;      // time step entering tau
  bool full_fine_scale_quadrature = false;
  double tol_grad = 1e-10;
  ActiveFields active;
};

// Interface-geometry data treated explicitly (lagged) inside a Newton loop,
// plus optional manufactured forcing used by tests.
struct LaggedFields {
  const ScalarField* kappa_bar = nullptr;  // nodal curvature
  const ScalarField* I_s = nullptr;        // nodal laser source (W/m^2)
  bool ded_mode = false;                   // powder-sink surface flux instead
  DedParams ded;
  Vec3 ded_center = Vec3::Zero();
  double ded_Qv = 0.0;
  const VectorField* f_ext = nullptr;      // extra body force (N/m^3)
  const ScalarField* q_ext = nullptr;      // extra heat source (W/m^3)
};

// Strong Dirichlet masks; constrained rows are replaced by identity.
struct BcMask {
  std::vector<char> u;    // 3N, per velocity dof
  std::vector<char> T;    // N
  std::vector<char> phi;  // N
  int pinned_pressure_node = -1;

  static BcMask none(const Mesh& m) {
    BcMask bc;
    bc.u.assign(3 * m.num_nodes(), 0);
    bc.T.assign(m.num_nodes(), 0);
    bc.phi.assign(m.num_nodes(), 0);
    return bc;
  }
};

// Raw views of the intermediate-level fields used in one assembly.
struct FieldViews {
  const Eigen::VectorXd* u = nullptr;      // 3N
  const Eigen::VectorXd* p = nullptr;      // N
  const Eigen::VectorXd* T = nullptr;      // N
  const Eigen::VectorXd* phi = nullptr;    // N
  const Eigen::VectorXd* u_dot = nullptr;  // 3N
  const Eigen::VectorXd* T_dot = nullptr;
  const Eigen::VectorXd* phi_dot = nullptr;
};

enum class JacobianMode { AnalyticFrozen, FiniteDifference };

class VmsAssembler {
 public:
  VmsAssembler(const Mesh& mesh, const VmsModel& model);

  // Sizes of the active blocks in (u, p, T, phi) order.
  std::array<int, 4> block_dims() const;
  int residual_size() const;

  // Assembles the VMS residual; throws on non-finite entries naming the node
  // and equation block. bc may be null.
  void assemble_residual(const FieldViews& f, const LaggedFields& lag,
                         const BcMask* bc, Eigen::VectorXd& R) const;

  // Assembles dR/d(unknowns) with the rate/value chain factors.
  void assemble_jacobian(const FieldViews& f, const LaggedFields& lag,
                         const BcMask* bc, double c_rate, double c_val,
                         JacobianMode mode, BlockMatrix& J) const;

  const Mesh& mesh() const { return *mesh_; }
  const VmsModel& model() const { return *model_; }

 private:
  struct LocalState;
  void element_residual(int e, const LocalState& ls, const LaggedFields& lag,
                        double* r_loc) const;
  void analytic_element_jacobian(int e, const LocalState& ls, const LaggedFields& lag,
                                 double c_rate, double c_val, double K[24][24]) const;
  void gather(int e, const FieldViews& f, LocalState& ls) const;

  const Mesh* mesh_;
  const VmsModel* model_;
};

}  // namespace meltkit
