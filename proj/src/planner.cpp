#include "graphite/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include <Eigen/Dense>

#include "graphite/errors.hpp"

namespace graphite {

RolloutResult rollout(const EndEffectorState& initial, const ToolTipState& tip0,
                      const std::vector<InputSample>& inputs, const ForceModelParams& params,
                      const SurfaceMap& surface, double dt_s, WidthConvention convention) {
  if (!(dt_s > 0)) {
    throw ConfigError("dt must be positive");
  }
  const std::size_t n = inputs.size();
  RolloutResult out;
  out.states.resize(n + 1);
  out.tip_offsets_m.resize(n + 1);
  out.forces_n.resize(n + 1);
  out.widths_m.resize(n + 1);

  out.states[0] = initial;
  ToolTipState tip = tip0;
  for (std::size_t t = 0; t <= n; ++t) {
    const auto& s = out.states[t];
    const double z_ref = surface.height_clamped(s.x_m, s.y_m);
    const double pen = s.z_m - z_ref;
    const bool contact = pen <= 0;
    out.tip_offsets_m[t] = tip.offset_m;
    out.forces_n[t] = contact ? force(params, s.z_m, z_ref) : 0.0;
    out.widths_m[t] = (contact && tip.offset_m > 0)
                          ? deposition_width(axes(tip), s.psi_rad, convention)
                          : 0.0;
    if (t < n) {
      out.states[t + 1] = step(s, inputs[t], dt_s);
      const double step_len = std::hypot(out.states[t + 1].x_m - s.x_m,
                                         out.states[t + 1].y_m - s.y_m);
      tip = degrade(tip, out.forces_n[t], step_len);
    }
  }
  return out;
}

double cost(const std::vector<EndEffectorState>& states, const std::vector<double>& widths_m,
            const ReferenceStroke& stroke, const Eigen::Matrix3d& q_weight) {
  const std::size_t n_samples = stroke.samples.size();
  if (states.size() != n_samples || widths_m.size() != n_samples) {
    throw LengthMismatch("states/widths do not match the reference horizon");
  }
  double total = 0;
  for (std::size_t t = 0; t < n_samples; ++t) {
    const Eigen::Vector3d e(states[t].x_m - stroke.samples[t].x_m,
                            states[t].y_m - stroke.samples[t].y_m,
                            widths_m[t] - stroke.samples[t].w_m);
    total += e.dot(q_weight * e);
  }
  return total;
}

Plan make_plan(const std::vector<InputSample>& inputs, const EndEffectorState& initial,
               const ToolTipState& tip0, const ForceModelParams& params,
               const SurfaceMap& surface, const ReferenceStroke& stroke,
               const Eigen::Matrix3d& q_weight, WidthConvention convention) {
  if (inputs.size() != static_cast<std::size_t>(stroke.horizon())) {
    throw LengthMismatch("input sequence does not match the stroke horizon");
  }
  const RolloutResult r = rollout(initial, tip0, inputs, params, surface, stroke.dt_s, convention);
  Plan plan;
  plan.inputs = inputs;
  plan.predicted_states = r.states;
  plan.predicted_widths = r.widths_m;
  plan.predicted_cost = cost(r.states, r.widths_m, stroke, q_weight);
  return plan;
}

namespace detail {

double smoothed_objective(const std::vector<InputSample>& inputs,
                          const EndEffectorState& initial, const ToolTipState& tip0,
                          const ForceModelParams& params, const std::vector<double>& z_ref_m,
                          const ReferenceStroke& stroke, const PlannerConfig& config,
                          std::vector<double>* gradient) {
  const int n = static_cast<int>(inputs.size());
  const double dt = stroke.dt_s;
  const double kappa = config.kappa_m;
  const Eigen::Matrix3d& q_weight = config.q_weight;
  const bool major_on_cos = config.width_convention == WidthConvention::major_on_cos;

  // Per-unit-offset axis lengths of the contact ellipse.
  const double m = tip0.cone_slope;
  const double a = tip0.plane_slope;
  const double root = std::sqrt(m * m - a * a);
  const double c_minor = 2.0 / root;
  const double c_major = c_minor * (m * std::sqrt(1.0 + a * a) / root);
  const double kd = tip0.wear_gain_per_n;

  // Forward pass.
  std::vector<double> x(n + 1), y(n + 1), z(n + 1), psi(n + 1), d(n + 1);
  std::vector<double> wear_force(std::max(n, 0)), step_len(std::max(n, 0));
  std::vector<std::uint8_t> contact(n + 1), force_active(std::max(n, 0)),
      wear_free(std::max(n, 0));
  x[0] = initial.x_m;
  y[0] = initial.y_m;
  z[0] = initial.z_m;
  psi[0] = initial.psi_rad;
  d[0] = tip0.offset_m;
  for (int t = 0; t < n; ++t) {
    x[t + 1] = x[t] + dt * inputs[t].vx_mps;
    y[t + 1] = y[t] + dt * inputs[t].vy_mps;
    z[t + 1] = z[t] + dt * inputs[t].vz_mps;
    psi[t + 1] = psi[t] + dt * inputs[t].wpsi_radps;
  }
  for (int t = 0; t <= n; ++t) {
    contact[t] = (z[t] - z_ref_m[t]) <= 0;
  }
  for (int t = 0; t < n; ++t) {
    const double lin = params.theta_n_per_m * (z[t] - z_ref_m[t]) + params.theta0_n;
    force_active[t] = contact[t] && lin > 0;
    wear_force[t] = contact[t] ? std::max(lin, 0.0) : 0.0;
    step_len[t] = dt * std::hypot(inputs[t].vx_mps, inputs[t].vy_mps);
    const double increment = kd * wear_force[t] * step_len[t];
    wear_free[t] = d[t] + increment < tip0.offset_max_m;
    d[t + 1] = std::min(d[t] + increment, tip0.offset_max_m);
  }

  // Smoothed width per sample plus the partials needed for the backward pass.
  std::vector<double> q1(n + 1), q2(n + 1), q3(n + 1), dw_dd(n + 1), dw_dpsi(n + 1);
  double objective = 0;
  for (int t = 0; t <= n; ++t) {
    double w_smooth = 0;
    dw_dd[t] = 0;
    dw_dpsi[t] = 0;
    if (contact[t]) {
      const double cos_abs = std::abs(std::cos(psi[t]));
      const double sin_abs = std::abs(std::sin(psi[t]));
      const double sign_cos = std::cos(psi[t]) == 0 ? 0.0 : (std::cos(psi[t]) > 0 ? 1.0 : -1.0);
      const double sign_sin = std::sin(psi[t]) == 0 ? 0.0 : (std::sin(psi[t]) > 0 ? 1.0 : -1.0);
      const double major = c_major * d[t];
      const double minor = c_minor * d[t];
      const double proj_a = major_on_cos ? major * cos_abs : major * sin_abs;
      const double proj_b = major_on_cos ? minor * sin_abs : minor * cos_abs;
      const double hi = std::max(proj_a, proj_b);
      const double lo = std::min(proj_a, proj_b);
      const double tail = std::exp((lo - hi) / kappa);
      w_smooth = hi + kappa * std::log1p(tail);
      // Softmax weights of the two projections.
      const double weight_hi = 1.0 / (1.0 + tail);
      const double weight_lo = 1.0 - weight_hi;
      const double weight_a = proj_a >= proj_b ? weight_hi : weight_lo;
      const double weight_b = 1.0 - weight_a;
      const double da_dpsi = major_on_cos ? -major * sign_cos * std::sin(psi[t])
                                          : major * sign_sin * std::cos(psi[t]);
      const double db_dpsi = major_on_cos ? minor * sign_sin * std::cos(psi[t])
                                          : -minor * sign_cos * std::sin(psi[t]);
      const double da_dd = major_on_cos ? c_major * cos_abs : c_major * sin_abs;
      const double db_dd = major_on_cos ? c_minor * sin_abs : c_minor * cos_abs;
      dw_dd[t] = weight_a * da_dd + weight_b * db_dd;
      dw_dpsi[t] = weight_a * da_dpsi + weight_b * db_dpsi;
    }
    const Eigen::Vector3d e(x[t] - stroke.samples[t].x_m, y[t] - stroke.samples[t].y_m,
                            w_smooth - stroke.samples[t].w_m);
    objective += e.dot(q_weight * e);
    if (gradient != nullptr) {
      const Eigen::Vector3d q_err = 2.0 * (q_weight * e);
      q1[t] = q_err(0);
      q2[t] = q_err(1);
      q3[t] = q_err(2);
    }
  }
  if (gradient == nullptr) {
    return objective;
  }

  gradient->assign(static_cast<std::size_t>(4) * n, 0.0);
  if (n == 0) {
    return objective;
  }

  // Backward pass: adjoint of the wear state, then per-state contributions.
  std::vector<double> lam_d(n + 1);
  lam_d[n] = q3[n] * dw_dd[n];
  for (int t = n - 1; t >= 0; --t) {
    lam_d[t] = q3[t] * dw_dd[t] + (wear_free[t] ? lam_d[t + 1] : 0.0);
  }

  double sx = 0, sy = 0, sz = 0, spsi = 0;  // suffix sums of state gradients
  for (int t = n - 1; t >= 0; --t) {
    const int succ = t + 1;
    // Contribution of state succ (direct tracking + force-through-wear).
    double gz_state = 0;
    if (succ < n && wear_free[succ] && force_active[succ]) {
      gz_state = lam_d[succ + 1] * kd * step_len[succ] * params.theta_n_per_m;
    }
    sx += q1[succ];
    sy += q2[succ];
    sz += gz_state;
    spsi += q3[succ] * dw_dpsi[succ];

    double* g = gradient->data() + static_cast<std::size_t>(4) * t;
    g[0] = dt * sx;
    g[1] = dt * sy;
    g[2] = dt * sz;
    g[3] = dt * spsi;

    // Wear also grows with the planar distance covered by this very input.
    if (wear_free[t] && wear_force[t] > 0) {
      const double g_len = lam_d[t + 1] * kd * wear_force[t];
      const double norm = std::hypot(inputs[t].vx_mps, inputs[t].vy_mps);
      if (norm > 0) {
        g[0] += g_len * dt * inputs[t].vx_mps / norm;
        g[1] += g_len * dt * inputs[t].vy_mps / norm;
      }
    }
  }
  return objective;
}

}  // namespace detail

namespace {

// Clamp one input coordinate so the input stays in its box and the stepped
// state lands inside the closed state box. Assumes both boxes admit zero.
double clamp_coordinate(double state, double input, double dt, double state_lo, double state_hi,
                        double input_lo, double input_hi) {
  double lo = std::max(input_lo, (state_lo - state) / dt);
  double hi = std::min(input_hi, (state_hi - state) / dt);
  if (lo > hi) {
    return 0.0;
  }
  double v = std::clamp(input, lo, hi);
  // Rounding guard: keep the stepped state inside the closed box bit-exactly.
  while (state + dt * v > state_hi) {
    v = std::nextafter(v, -std::numeric_limits<double>::infinity());
  }
  while (state + dt * v < state_lo) {
    v = std::nextafter(v, std::numeric_limits<double>::infinity());
  }
  if (v < input_lo || v > input_hi) {
    v = 0.0;
  }
  return v;
}

void retract_inputs(std::vector<InputSample>& inputs, const EndEffectorState& initial,
                    const BoxConstraints& c, double dt) {
  EndEffectorState s = initial;
  for (auto& u : inputs) {
    u.vx_mps = clamp_coordinate(s.x_m, u.vx_mps, dt, c.state_lower[0], c.state_upper[0],
                                c.input_lower[0], c.input_upper[0]);
    u.vy_mps = clamp_coordinate(s.y_m, u.vy_mps, dt, c.state_lower[1], c.state_upper[1],
                                c.input_lower[1], c.input_upper[1]);
    u.vz_mps = clamp_coordinate(s.z_m, u.vz_mps, dt, c.state_lower[2], c.state_upper[2],
                                c.input_lower[2], c.input_upper[2]);
    u.wpsi_radps = clamp_coordinate(s.psi_rad, u.wpsi_radps, dt, c.state_lower[3],
                                    c.state_upper[3], c.input_lower[3], c.input_upper[3]);
    s = step(s, u, dt);
  }
}

std::vector<InputSample> kinematic_warm_start(const ReferenceStroke& stroke,
                                              const EndEffectorState& initial,
                                              const std::vector<double>& z_ref_m,
                                              double nominal_depth_m) {
  const int n = stroke.horizon();
  const double dt = stroke.dt_s;
  std::vector<InputSample> inputs(n);
  EndEffectorState s = initial;
  for (int t = 0; t < n; ++t) {
    InputSample u;
    u.vx_mps = (stroke.samples[t + 1].x_m - s.x_m) / dt;
    u.vy_mps = (stroke.samples[t + 1].y_m - s.y_m) / dt;
    u.vz_mps = ((z_ref_m[t + 1] - nominal_depth_m) - s.z_m) / dt;
    u.wpsi_radps = 0;
    inputs[t] = u;
    s = step(s, u, dt);
  }
  return inputs;
}

struct DescentProblem {
  const ReferenceStroke& stroke;
  const EndEffectorState& initial;
  const ToolTipState& tip0;
  const ForceModelParams& params;
  const std::vector<double>& z_ref;
  const BoxConstraints& constraints;
  const PlannerConfig& config;

  double evaluate(const std::vector<InputSample>& u, std::vector<double>* grad) const {
    return detail::smoothed_objective(u, initial, tip0, params, z_ref, stroke, config, grad);
  }
};

// Projected gradient descent with a backtracking/extending step size.
std::vector<InputSample> descend(const DescentProblem& problem, std::vector<InputSample> u) {
  const int n = static_cast<int>(u.size());
  if (n == 0) {
    return u;
  }
  const double dt = problem.stroke.dt_s;
  double value = problem.evaluate(u, nullptr);
  double eta = 1e-2;
  std::vector<double> grad;
  for (int iter = 0; iter < problem.config.max_iterations; ++iter) {
    problem.evaluate(u, &grad);
    double grad_norm2 = 0;
    for (double g : grad) {
      grad_norm2 += g * g;
    }
    if (grad_norm2 == 0) {
      break;
    }
    bool improved = false;
    std::vector<InputSample> candidate;
    double candidate_value = value;
    for (int shrink = 0; shrink < 60; ++shrink) {
      candidate = u;
      for (int t = 0; t < n; ++t) {
        candidate[t].vx_mps -= eta * grad[4 * t + 0];
        candidate[t].vy_mps -= eta * grad[4 * t + 1];
        candidate[t].vz_mps -= eta * grad[4 * t + 2];
        candidate[t].wpsi_radps -= eta * grad[4 * t + 3];
      }
      retract_inputs(candidate, problem.initial, problem.constraints, dt);
      candidate_value = problem.evaluate(candidate, nullptr);
      if (candidate_value < value) {
        improved = true;
        break;
      }
      eta *= 0.5;
    }
    if (!improved) {
      break;
    }
    const double relative_drop = (value - candidate_value) / std::max(std::abs(value), 1e-300);
    u = std::move(candidate);
    value = candidate_value;
    if (relative_drop < problem.config.step_tolerance) {
      break;
    }
    eta = std::min(eta * 1.5, 1e8);
  }
  return u;
}

}  // namespace

Plan plan_stroke(const ReferenceStroke& stroke, const EndEffectorState& initial,
                 const ToolTipState& tip0, const ForceModelParams& params,
                 const SurfaceMap& surface, const BoxConstraints& constraints,
                 const PlannerConfig& config) {
  if (!state_feasible(initial, constraints)) {
    throw InfeasibleStart("initial state violates the state box");
  }
  for (int i = 0; i < 4; ++i) {
    if (constraints.input_lower[i] > 0 || constraints.input_upper[i] < 0) {
      throw ConfigError("input box must contain zero for projection to stay feasible");
    }
  }
  if (!(config.kappa_m > 0) || config.max_iterations < 1 || config.restarts < 0) {
    throw ConfigError("invalid planner configuration");
  }
  if (!config.q_weight.isApprox(config.q_weight.transpose()) ||
      Eigen::LLT<Eigen::Matrix3d>(config.q_weight).info() != Eigen::Success) {
    throw ConfigError("tracking weight matrix must be symmetric positive definite");
  }

  const int n = stroke.horizon();
  const double dt = stroke.dt_s;
  std::vector<double> z_ref(n + 1);
  for (int t = 0; t <= n; ++t) {
    z_ref[t] = surface.height_clamped(stroke.samples[t].x_m, stroke.samples[t].y_m);
  }

  std::vector<InputSample> warm =
      kinematic_warm_start(stroke, initial, z_ref, config.nominal_depth_m);
  retract_inputs(warm, initial, constraints, dt);

  const DescentProblem problem{stroke, initial, tip0, params, z_ref, constraints, config};

  std::vector<std::vector<InputSample>> candidates;
  candidates.push_back(warm);  // the optimizer never returns worse than this
  candidates.push_back(descend(problem, warm));

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::array<double, 4> warm_scale{0, 0, 0, 0};
  for (const auto& u : warm) {
    warm_scale[0] = std::max(warm_scale[0], std::abs(u.vx_mps));
    warm_scale[1] = std::max(warm_scale[1], std::abs(u.vy_mps));
    warm_scale[2] = std::max(warm_scale[2], std::abs(u.vz_mps));
    warm_scale[3] = std::max(warm_scale[3], std::abs(u.wpsi_radps));
  }
  for (int r = 0; r < config.restarts; ++r) {
    std::vector<InputSample> perturbed = warm;
    for (auto& u : perturbed) {
      double* coords[4] = {&u.vx_mps, &u.vy_mps, &u.vz_mps, &u.wpsi_radps};
      for (int i = 0; i < 4; ++i) {
        const double range = constraints.input_upper[i] - constraints.input_lower[i];
        const double sd =
            std::isfinite(range) ? 0.08 * range : 0.1 * (1.0 + warm_scale[i]);
        *coords[i] += sd * gauss(rng);
      }
    }
    retract_inputs(perturbed, initial, constraints, dt);
    candidates.push_back(descend(problem, perturbed));
  }

  // Select by the exact (unsmoothed) tracking cost; ties keep the earliest
  // candidate so repeated runs pick the same plan.
  Plan best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& candidate : candidates) {
    Plan plan = make_plan(candidate, initial, tip0, params, surface, stroke, config.q_weight,
                          config.width_convention);
    if (plan.predicted_cost < best_cost) {
      best_cost = plan.predicted_cost;
      best = std::move(plan);
    }
  }
  return best;
}

}  // namespace graphite
