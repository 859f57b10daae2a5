#pragma once

// Dormand-Prince 5(4) with the Hairer/Wanner PI step controller, the
// Shampine 4th-order continuous extension, and sign-change event location.
//
// Works on any State with size(), operator[] and value semantics
// (std::array for the regularized system, std::vector for n bodies).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "sbc/dynamics.hpp"
#include "sbc/model.hpp"

namespace sbc {

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double h_init = 0;  // 0 selects a starting step automatically
  double h_max = std::numeric_limits<double>::infinity();
  long max_steps = 2'000'000;
  double event_tol = 1e-12;

  void validate() const {
    auto tol_ok = [](double t) { return t > 0 && t <= 1e-2; };
    if (!tol_ok(rel_tol) || !tol_ok(abs_tol)) {
      throw std::invalid_argument("IntegratorConfig: tolerances must lie in (0, 1e-2]");
    }
    if (max_steps <= 0) throw std::invalid_argument("IntegratorConfig: max_steps must be > 0");
    if (h_init < 0 || !(h_max > 0)) throw std::invalid_argument("IntegratorConfig: bad step bounds");
    if (!(event_tol > 0)) throw std::invalid_argument("IntegratorConfig: event_tol must be > 0");
  }
};

class IntegrationError : public std::runtime_error {
 public:
  enum class Kind { StepUnderflow, MaxSteps, NoEvent };

  IntegrationError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail {

// Butcher tableau, Dormand & Prince (1980).
struct DP5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  // 5th minus embedded 4th order weights
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                          d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                          d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

}  // namespace detail

template <typename State>
using value_type_of = std::remove_cvref_t<decltype(std::declval<const State&>()[0])>;

/// One Dormand-Prince trial step and the data needed to interpolate it.
template <typename State>
struct DPTrial {
  using Real = value_type_of<State>;
  State y_new;
  State k_new;  // field at (s + h, y_new); first stage of the next step
  Real error{};  // scaled RMS error estimate, accept when <= 1
  std::array<State, 5> dense;  // interpolation coefficients
};

template <typename State, typename Field>
DPTrial<State> dp_trial(const Field& f, value_type_of<State> s, const State& y, const State& k1,
                        value_type_of<State> h, double rel_tol, double abs_tol) {
  using Real = value_type_of<State>;
  using T = detail::DP5;
  using std::abs;
  using std::sqrt;
  const std::size_t n = y.size();
  State tmp = y;

  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * Real(T::a21) * k1[i];
  const State k2 = f(s + Real(T::c2) * h, tmp);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (Real(T::a31) * k1[i] + Real(T::a32) * k2[i]);
  const State k3 = f(s + Real(T::c3) * h, tmp);
  for (std::size_t i = 0; i < n; ++i) {
    tmp[i] = y[i] + h * (Real(T::a41) * k1[i] + Real(T::a42) * k2[i] + Real(T::a43) * k3[i]);
  }
  const State k4 = f(s + Real(T::c4) * h, tmp);
  for (std::size_t i = 0; i < n; ++i) {
    tmp[i] = y[i] + h * (Real(T::a51) * k1[i] + Real(T::a52) * k2[i] + Real(T::a53) * k3[i] +
                         Real(T::a54) * k4[i]);
  }
  const State k5 = f(s + Real(T::c5) * h, tmp);
  for (std::size_t i = 0; i < n; ++i) {
    tmp[i] = y[i] + h * (Real(T::a61) * k1[i] + Real(T::a62) * k2[i] + Real(T::a63) * k3[i] +
                         Real(T::a64) * k4[i] + Real(T::a65) * k5[i]);
  }
  const State k6 = f(s + h, tmp);

  DPTrial<State> out{y, y, Real(0), {y, y, y, y, y}};
  for (std::size_t i = 0; i < n; ++i) {
    out.y_new[i] = y[i] + h * (Real(T::a71) * k1[i] + Real(T::a73) * k3[i] + Real(T::a74) * k4[i] +
                               Real(T::a75) * k5[i] + Real(T::a76) * k6[i]);
  }
  out.k_new = f(s + h, out.y_new);
  const State& k7 = out.k_new;

  Real sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Real e = h * (Real(T::e1) * k1[i] + Real(T::e3) * k3[i] + Real(T::e4) * k4[i] +
                        Real(T::e5) * k5[i] + Real(T::e6) * k6[i] + Real(T::e7) * k7[i]);
    const Real sc = Real(abs_tol) + Real(rel_tol) * std::max(abs(y[i]), abs(out.y_new[i]));
    sum += (e / sc) * (e / sc);
  }
  out.error = sqrt(sum / Real(n));

  auto& [r1, r2, r3, r4, r5] = out.dense;
  for (std::size_t i = 0; i < n; ++i) {
    r1[i] = y[i];
    r2[i] = out.y_new[i] - y[i];
    r3[i] = h * k1[i] - r2[i];
    r4[i] = r2[i] - h * k7[i] - r3[i];
    r5[i] = h * (Real(T::d1) * k1[i] + Real(T::d3) * k3[i] + Real(T::d4) * k4[i] +
                 Real(T::d5) * k5[i] + Real(T::d6) * k6[i] + Real(T::d7) * k7[i]);
  }
  return out;
}

template <typename State>
struct StepResult {
  using Real = value_type_of<State>;
  State y;
  Real s{};
  Real h_used{};
  Real error{};
  Real h_next{};
  int rejections = 0;
};

/// Adaptive stepper holding the current point, FSAL stage and the dense
/// coefficients of the last accepted step.
template <typename State, typename Field>
class DormandPrince54 {
 public:
  using Real = value_type_of<State>;
  using StepLimiter = std::function<Real(Real, const State&)>;

  DormandPrince54(Field f, IntegratorConfig cfg) : f_(std::move(f)), cfg_(cfg) { cfg_.validate(); }

  void reset(Real s, const State& y) {
    s_ = s_prev_ = s;
    y_ = y_prev_ = y;
    k_ = k_prev_ = f_(s, y);
    h_ = cfg_.h_init > 0 ? Real(cfg_.h_init) : initial_step();
    facold_ = Real(1e-4);
    last_rejected_ = false;
    steps_ = 0;
    dense_.reset();
  }

  /// Upper bound on the next step, evaluated before each attempt.
  void set_step_limiter(StepLimiter limiter) { limiter_ = std::move(limiter); }

  /// One accepted step that never passes `s_stop` and lands on it exactly
  /// when clipped.
  StepResult<State> step(Real s_stop = std::numeric_limits<Real>::infinity()) {
    using std::abs;
    using std::pow;
    constexpr Real safe = Real(0.9), fac_min = Real(0.2), fac_max = Real(10), beta = Real(0.04);
    const Real expo = Real(0.2) - beta * Real(0.75);
    if (steps_ >= cfg_.max_steps) {
      throw IntegrationError(IntegrationError::Kind::MaxSteps,
                             "integrator: max_steps (" + std::to_string(cfg_.max_steps) +
                                 ") exhausted at s = " + std::to_string(double(s_)));
    }
    Real h = std::min(h_, Real(cfg_.h_max));
    if (limiter_) h = std::min(h, limiter_(s_, y_));
    const Real h_cap = s_stop - s_;
    if (!(h_cap > 0)) throw std::logic_error("integrator: step requested at or past s_stop");
    h = std::min(h, h_cap);
    int rejections = 0;
    for (;;) {
      const Real floor = 16 * std::numeric_limits<Real>::epsilon() * std::max(abs(s_), Real(1));
      if (!(h > floor)) {
        throw IntegrationError(IntegrationError::Kind::StepUnderflow,
                               "integrator: step size underflow at s = " + std::to_string(double(s_)) +
                                   " (singularity or near total collapse)");
      }
      auto trial = dp_trial(f_, s_, y_, k_, h, cfg_.rel_tol, cfg_.abs_tol);
      const Real err = trial.error;
      if (!std::isfinite(double(err))) {
        h *= Real(0.1);
        ++rejections;
        last_rejected_ = true;
        continue;
      }
      const Real fac11 = pow(std::max(err, Real(1e-300)), expo);
      if (err <= 1) {
        Real fac = fac11 / pow(facold_, beta);
        fac = std::max(1 / fac_max, std::min(1 / fac_min, fac / safe));
        Real h_new = h / fac;
        if (last_rejected_) h_new = std::min(h_new, h);
        facold_ = std::max(err, Real(1e-4));
        last_rejected_ = false;

        s_prev_ = s_;
        y_prev_ = y_;
        k_prev_ = k_;
        h_prev_ = h;
        dense_ = std::move(trial.dense);
        s_ = (h == h_cap) ? s_stop : s_ + h;
        y_ = std::move(trial.y_new);
        k_ = std::move(trial.k_new);
        // Don't let a clipped step shrink the controller's proposal.
        h_ = (h == h_cap) ? std::max(h_new, h_) : h_new;
        ++steps_;
        return {y_, s_, h, err, h_, rejections};
      }
      h = h / std::min(1 / fac_min, fac11 / safe);
      ++rejections;
      last_rejected_ = true;
    }
  }

  /// Dense output inside the last accepted step.
  State dense(Real s) const {
    if (!dense_) throw std::logic_error("dense output requested before the first step");
    const Real th = (s - s_prev_) / h_prev_;
    const Real th1 = 1 - th;
    const auto& [r1, r2, r3, r4, r5] = *dense_;
    State out = r1;
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i])));
    }
    return out;
  }

  /// Direct 5th-order step of length h from the start of the last accepted step.
  State from_step_start(Real h) const {
    if (h == 0) return y_prev_;
    return dp_trial(f_, s_prev_, y_prev_, k_prev_, h, cfg_.rel_tol, cfg_.abs_tol).y_new;
  }

  Real s() const { return s_; }
  const State& y() const { return y_; }
  Real s_prev() const { return s_prev_; }
  const State& y_prev() const { return y_prev_; }
  long steps() const { return steps_; }
  const IntegratorConfig& config() const { return cfg_; }
  const Field& field() const { return f_; }

 private:
  Real initial_step() const {
    using std::abs;
    using std::pow;
    using std::sqrt;
    Real d0 = 0, d1 = 0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const Real sc = Real(cfg_.abs_tol) + Real(cfg_.rel_tol) * abs(y_[i]);
      d0 += (y_[i] / sc) * (y_[i] / sc);
      d1 += (k_[i] / sc) * (k_[i] / sc);
    }
    d0 = sqrt(d0 / y_.size());
    d1 = sqrt(d1 / y_.size());
    Real h0 = (d0 < Real(1e-5) || d1 < Real(1e-5)) ? Real(1e-6) : Real(0.01) * d0 / d1;
    // Order-based refinement, as in Hairer & Wanner's hinit.
    State y1 = y_;
    for (std::size_t i = 0; i < y1.size(); ++i) y1[i] = y_[i] + h0 * k_[i];
    const State k1 = f_(s_ + h0, y1);
    Real d2 = 0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      const Real sc = Real(cfg_.abs_tol) + Real(cfg_.rel_tol) * abs(y_[i]);
      d2 += ((k1[i] - k_[i]) / sc) * ((k1[i] - k_[i]) / sc);
    }
    d2 = sqrt(d2 / y_.size()) / h0;
    const Real dmax = std::max(d1, d2);
    const Real h1 = dmax <= Real(1e-15) ? std::max(Real(1e-6), h0 * Real(1e-3))
                                        : pow(Real(0.01) / dmax, Real(0.2));
    return std::min({Real(100) * h0, h1, Real(cfg_.h_max)});
  }

  Field f_;
  IntegratorConfig cfg_;
  StepLimiter limiter_;
  Real s_{}, s_prev_{}, h_{}, h_prev_{}, facold_{};
  State y_{}, y_prev_{}, k_{}, k_prev_{};
  std::optional<std::array<State, 5>> dense_;
  bool last_rejected_ = false;
  long steps_ = 0;
};

/// The free-function form of a single accepted adaptive step.
template <typename State, typename Field>
StepResult<State> adaptive_step(const Field& f, value_type_of<State> s, const State& y,
                                value_type_of<State> h, const IntegratorConfig& cfg) {
  IntegratorConfig c = cfg;
  c.h_init = double(h);
  DormandPrince54<State, Field> stepper(f, c);
  stepper.reset(s, y);
  return stepper.step();
}

/// Fixed-step verification mode: n_steps equal 5th-order steps.
template <typename State, typename Field>
State integrate_fixed(const Field& f, value_type_of<State> s0, State y, value_type_of<State> s1,
                      long n_steps) {
  using Real = value_type_of<State>;
  if (n_steps <= 0) throw std::invalid_argument("integrate_fixed: n_steps must be positive");
  const Real h = (s1 - s0) / Real(n_steps);
  State k = f(s0, y);
  for (long i = 0; i < n_steps; ++i) {
    auto trial = dp_trial(f, s0 + Real(i) * h, y, k, h, 1e-2, 1e-2);
    y = std::move(trial.y_new);
    k = std::move(trial.k_new);
  }
  return y;
}

enum class Crossing { Falling, Rising, Either };

template <typename State>
struct LocatedEvent {
  using Real = value_type_of<State>;
  Real s{};
  State y;
  Real g{};
  bool converged = false;
};

/// Locate the zero of g inside the stepper's last accepted step, given
/// g(s_prev) and g(s) of opposite sign. The root of the dense interpolant
/// seeds an Illinois iteration on direct steps from the step start, so the
/// returned state carries full step accuracy, not interpolation error.
template <typename State, typename Field, typename EventFn>
LocatedEvent<State> locate_in_last_step(const DormandPrince54<State, Field>& stepper,
                                        const EventFn& g, value_type_of<State> g_lo,
                                        value_type_of<State> g_hi, double tol) {
  using Real = value_type_of<State>;
  using std::abs;
  const Real s0 = stepper.s_prev();
  const Real h = stepper.s() - s0;

  // Dense output root: a few secant/bisection passes, cheap.
  Real a = 0, b = h, ga = g_lo, gb = g_hi;
  for (int it = 0; it < 30; ++it) {
    Real m = a - ga * (b - a) / (gb - ga);
    if (!(m > a && m < b)) m = (a + b) / 2;
    const Real gm = g(s0 + m, stepper.dense(s0 + m));
    if ((gm > 0) == (ga > 0)) {
      a = m;
      ga = gm;
    } else {
      b = m;
      gb = gm;
    }
    if (abs(gm) < Real(tol) * Real(1e-2)) break;
  }
  Real guess = (abs(ga) < abs(gb)) ? a : b;

  // Illinois on exact sub-steps, bracket [0, h].
  a = 0;
  b = h;
  ga = g_lo;
  gb = g_hi;
  Real x = guess;
  State yx = stepper.from_step_start(x);
  Real gx = g(s0 + x, yx);
  int side = 0;
  for (int it = 0; it < 200; ++it) {
    if (abs(gx) <= Real(tol)) return {s0 + x, yx, gx, true};
    if ((gx > 0) == (ga > 0)) {
      a = x;
      ga = gx;
      if (side == -1) gb /= 2;
      side = -1;
    } else {
      b = x;
      gb = gx;
      if (side == 1) ga /= 2;
      side = 1;
    }
    if (b - a <= 4 * std::numeric_limits<Real>::epsilon() * std::max(abs(s0) + abs(b), Real(1))) break;
    x = (a * gb - b * ga) / (gb - ga);
    if (!(x > a && x < b)) x = (a + b) / 2;
    yx = stepper.from_step_start(x);
    gx = g(s0 + x, yx);
  }
  return {s0 + x, yx, gx, abs(gx) <= Real(tol)};
}

template <typename Real>
bool crosses(Real before, Real after, Crossing dir) {
  const bool falling = before > 0 && after <= 0;
  const bool rising = before < 0 && after >= 0;
  switch (dir) {
    case Crossing::Falling: return falling;
    case Crossing::Rising: return rising;
    case Crossing::Either: return falling || rising;
  }
  return false;
}

// ---------------------------------------------------------------------------
// The regularized four-body system.

template <typename Real>
struct BasicEventResult {
  BasicReducedState<Real> state_at_event;
  Real s_event{};
  Real t_event{};
  bool converged = false;
  long steps = 0;
};
using EventResult = BasicEventResult<double>;

template <typename Real>
using RegularizedStepper = DormandPrince54<RegularizedVector<Real>, RegularizedField<Real>>;

template <typename Real>
RegularizedStepper<Real> make_regularized_stepper(Real v, const IntegratorConfig& cfg) {
  const Real E = energy_from_v(v);
  RegularizedStepper<Real> stepper(RegularizedField<Real>{E}, cfg);
  stepper.reset(Real(0), pack(initial_reduced_state(v)));
  return stepper;
}

/// Integrate from the square initial condition to the first falling zero of Q1.
template <typename Real>
BasicEventResult<Real> integrate_until_sbc(Real v, const IntegratorConfig& cfg = {}) {
  if (!(v > 0 && v < v_max<Real>())) {
    throw DomainError("integrate_until_sbc: speed must lie in (0, v_max)");
  }
  auto stepper = make_regularized_stepper(v, cfg);
  auto q1 = [](Real, const RegularizedVector<Real>& y) { return y[0]; };
  Real before = stepper.y()[0];
  try {
    for (;;) {
      stepper.step();
      const Real after = stepper.y()[0];
      if (crosses(before, after, Crossing::Falling)) {
        auto ev = locate_in_last_step(stepper, q1, before, after, cfg.event_tol);
        return {unpack(ev.y, ev.s), ev.s, ev.y[4], ev.converged, stepper.steps()};
      }
      before = after;
    }
  } catch (const IntegrationError& e) {
    if (e.kind() == IntegrationError::Kind::MaxSteps) {
      throw IntegrationError(IntegrationError::Kind::NoEvent,
                             std::string("integrate_until_sbc: no collision found; ") + e.what());
    }
    throw;
  }
}

/// `sample_count` states at equally spaced s in [0, s_end] by dense output.
template <typename Real>
std::vector<BasicReducedState<Real>> integrate_span(Real v, Real s_end, std::size_t sample_count,
                                                    const IntegratorConfig& cfg = {}) {
  if (!(s_end >= 0)) throw DomainError("integrate_span: s_end must be nonnegative");
  const auto z0 = initial_reduced_state(v);
  if (s_end == 0 || sample_count <= 1) return {z0};
  auto stepper = make_regularized_stepper(v, cfg);
  std::vector<BasicReducedState<Real>> out;
  out.reserve(sample_count);
  out.push_back(z0);
  const Real ds = s_end / Real(sample_count - 1);
  std::size_t next = 1;
  while (next < sample_count) {
    // Last sample lands exactly on s_end, no interpolation.
    if (next + 1 == sample_count) {
      while (stepper.s() < s_end) stepper.step(s_end);
      out.push_back(unpack(stepper.y(), s_end));
      break;
    }
    stepper.step(s_end);
    while (next + 1 < sample_count && Real(next) * ds <= stepper.s()) {
      const Real sk = Real(next) * ds;
      out.push_back(unpack(stepper.dense(sk), sk));
      ++next;
    }
  }
  return out;
}

/// Integrate to s_end and return the final state (exact landing, no dense output).
template <typename Real>
BasicReducedState<Real> integrate_to(Real v, Real s_end, const IntegratorConfig& cfg = {}) {
  auto stepper = make_regularized_stepper(v, cfg);
  while (stepper.s() < s_end) stepper.step(s_end);
  return unpack(stepper.y(), s_end);
}

enum class CollisionPair { Q1_pairs_12_34, Q2_pairs_14_23 };

template <typename Real>
struct BasicCollisionEvent {
  CollisionPair pair;
  BasicEventResult<Real> event;
};

/// Every zero crossing of Q1 or Q2 in (0, s_end]: each is a simultaneous
/// binary collision (bodies 1-2 and 3-4 for Q1, 1-4 and 2-3 for Q2).
template <typename Real>
std::vector<BasicCollisionEvent<Real>> collision_events(Real v, Real s_end,
                                                        const IntegratorConfig& cfg = {}) {
  auto stepper = make_regularized_stepper(v, cfg);
  std::vector<BasicCollisionEvent<Real>> out;
  auto comp = [](std::size_t i) {
    return [i](Real, const RegularizedVector<Real>& y) { return y[i]; };
  };
  while (stepper.s() < s_end) {
    const RegularizedVector<Real> before = stepper.y();
    stepper.step(s_end);
    for (std::size_t i : {std::size_t{0}, std::size_t{1}}) {
      if (crosses(before[i], stepper.y()[i], Crossing::Either)) {
        auto ev = locate_in_last_step(stepper, comp(i), before[i], stepper.y()[i], cfg.event_tol);
        out.push_back({i == 0 ? CollisionPair::Q1_pairs_12_34 : CollisionPair::Q2_pairs_14_23,
                       {unpack(ev.y, ev.s), ev.s, ev.y[4], ev.converged, stepper.steps()}});
      }
    }
  }
  return out;
}

}  // namespace sbc
