#include "ebrake/physics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "ebrake/format.hpp"
#include "ebrake/harm.hpp"

namespace ebrake {

namespace {

// Switching times closer than this to a period boundary snap onto it.
constexpr double kTimeEps = 1e-12;
constexpr double kNoSpeedLimit = std::numeric_limits<double>::infinity();
// Bound on constant-acceleration pieces per period (guards against bouncing
// contacts accumulating impacts in finite time).
constexpr int kMaxPieces = 64;
// Pairs closer than this count as touching when grouping resting contacts.
constexpr double kTouchGap = 1e-9;

// Holds acceleration u for `duration` without reversing or exceeding vmax.
void advance(double& x, double& v, double u, double duration, double vmax) {
  if (duration <= 0.0) return;
  if (u < 0.0) {
    const double t_stop = v / -u;
    if (t_stop <= duration) {
      x += 0.5 * v * t_stop;
      v = 0.0;
      return;
    }
  } else if (u > 0.0 && v + u * duration > vmax) {
    const double t_sat = std::max(0.0, (vmax - v) / u);
    x += v * t_sat + 0.5 * u * t_sat * t_sat + vmax * (duration - t_sat);
    v = vmax;
    return;
  }
  x += v * duration + 0.5 * u * duration * duration;
  v += u * duration;
}

// Acceleration actually realized: a stopped vehicle does not brake further and
// a saturated one does not accelerate further.
double realized(double v, double u, double vmax) {
  if (u < 0.0 && v <= 0.0) return 0.0;
  if (u > 0.0 && v >= vmax) return 0.0;
  return u;
}

// Time until a realized acceleration stops applying (standstill or saturation).
double time_to_limit(double v, double a, double vmax) {
  if (a < 0.0) return v / -a;
  if (a > 0.0 && std::isfinite(vmax)) return (vmax - v) / a;
  return kNoSpeedLimit;
}

// Earliest t > 0 at which gap(t) = g + w t + a t^2 / 2 reaches zero from
// above, for a pair that is apart (g > 0) or separating from contact.
std::optional<double> contact_time(double g, double w, double a) {
  if (g == 0.0) {
    if (w > 0.0 && a < 0.0) return -2.0 * w / a;
    return std::nullopt;
  }
  if (a == 0.0) {
    if (w < 0.0) return -g / w;
    return std::nullopt;
  }
  const double disc = w * w - 2.0 * a * g;
  if (disc < 0.0) return std::nullopt;
  const double q = -0.5 * (w + std::copysign(std::sqrt(disc), w));
  double best = kNoSpeedLimit;
  for (double root : {q / (0.5 * a), q != 0.0 ? g / q : kNoSpeedLimit}) {
    if (root > 0.0 && root < best) best = root;
  }
  if (!std::isfinite(best)) return std::nullopt;
  return best;
}

bool inside(double t, double lo, double hi) {
  return t > lo + kTimeEps && t < hi - kTimeEps;
}

}  // namespace

double lead_accel(double t, double v1_0, double cap) {
  if (t < 0.0 || v1_0 <= 0.0) return 0.0;
  return t <= v1_0 / cap ? -cap : 0.0;
}

double rear_accel(double t, double tau3, double v3_0, double cap) {
  if (t < tau3 || v3_0 <= 0.0) return 0.0;
  return t <= tau3 + v3_0 / cap ? -cap : 0.0;
}

PostImpact resolve_collision(double v_front, double v_rear, double m_front,
                             double m_rear, double e) {
  const double closing = v_rear - v_front;
  if (!(closing > 0.0)) {
    throw std::domain_error("resolve_collision: pair is not closing");
  }
  const double total = m_front + m_rear;
  return {v_front + m_rear / total * (1.0 + e) * closing,
          v_rear - m_front / total * (1.0 + e) * closing};
}

bool control_active(const SimState& state, const ScenarioConfig& scenario) {
  return (state.n + 1) * scenario.dt > scenario.tau2 + kTimeEps;
}

namespace {

class PeriodIntegrator {
 public:
  PeriodIntegrator(SimState& state, const ScenarioConfig& scenario, StepResult& result, int step)
      : s_(state), sc_(scenario), result_(result), step_(step) {}

  // Applies impulses to touching, closing pairs (rear pair first) and removes
  // any overlap by moving the rear vehicle back to contact.
  void resolve_contacts() {
    const auto& veh = sc_.vehicles;
    for (Pair pair : {Pair::kRear, Pair::kFront}) {
      const int f = front_vehicle(pair);
      const int r = rear_vehicle(pair);
      const double gap = s_.x[f] - s_.x[r];
      const double closing = s_.v[r] - s_.v[f];
      if (gap <= 0.0 && closing > 0.0 && s_.pair_collided[static_cast<int>(pair)] &&
          closing < kRestingSpeed) {
        // Slow re-contact: settle into resting contact instead of bouncing forever.
        const double m = veh[f].mass + veh[r].mass;
        const double common = (veh[f].mass * s_.v[f] + veh[r].mass * s_.v[r]) / m;
        s_.v[f] = s_.v[r] = std::max(common, 0.0);
      } else if (gap <= 0.0 && closing > 0.0) {
        const PostImpact post =
            resolve_collision(s_.v[f], s_.v[r], veh[f].mass, veh[r].mass, sc_.restitution);
        const PairHarm harm = pair_harm(gap, closing, veh[f].mass, veh[r].mass);
        CollisionEvent event;
        event.pair = pair;
        event.step = step_;
        event.v_rel_pre = closing;
        event.v_rel_post = post.v_rear - post.v_front;
        event.harm_front = harm.front;
        event.harm_rear = harm.rear;
        event.v_front_pre = s_.v[f];
        event.v_rear_pre = s_.v[r];
        event.v_front_post = post.v_front;
        event.v_rear_post = post.v_rear;
        result_.events.push_back(event);
        s_.v[f] = std::max(post.v_front, 0.0);
        s_.v[r] = std::max(post.v_rear, 0.0);
        s_.pair_collided[static_cast<int>(pair)] = true;
      }
      if (gap < 0.0) s_.x[r] = s_.x[f];
    }
    s_.x[2] = std::min(s_.x[2], s_.x[1]);
    s_.v[1] = std::min(s_.v[1], sc_.v2_max);
  }

  // Integrates `duration` seconds under commanded accelerations, splitting at
  // standstill, saturation and contact instants.
  void run(std::array<double, 3> command, double duration, bool release_u2) {
    const std::array<double, 3> vmax = {kNoSpeedLimit, sc_.v2_max, kNoSpeedLimit};
    double remaining = duration;
    for (int piece = 0; remaining > 0.0 && piece < kMaxPieces; ++piece) {
      resolve_contacts();
      if (release_u2 && (s_.pair_collided[0] || s_.pair_collided[1])) command[1] = 0.0;
      std::array<double, 3> a{};
      for (int i = 0; i < 3; ++i) a[i] = realized(s_.v[i], command[i], vmax[i]);
      couple_resting(a);
      double h = remaining;
      for (int i = 0; i < 3; ++i) h = std::min(h, time_to_limit(s_.v[i], a[i], vmax[i]));
      std::array<bool, kPairCount> hit{};
      std::array<double, kPairCount> t_hit{kNoSpeedLimit, kNoSpeedLimit};
      for (Pair pair : {Pair::kFront, Pair::kRear}) {
        const int f = front_vehicle(pair);
        const int r = rear_vehicle(pair);
        const double gap = s_.x[f] - s_.x[r];
        if (gap < 0.0) continue;
        if (auto t = contact_time(gap, s_.v[f] - s_.v[r], a[f] - a[r])) {
          t_hit[static_cast<int>(pair)] = *t;
          h = std::min(h, *t);
        }
      }
      for (int i = 0; i < 3; ++i) advance(s_.x[i], s_.v[i], a[i], h, vmax[i]);
      for (Pair pair : {Pair::kRear, Pair::kFront}) {
        const int p = static_cast<int>(pair);
        hit[p] = t_hit[p] <= h;
        if (hit[p]) s_.x[rear_vehicle(pair)] = s_.x[front_vehicle(pair)];
      }
      remaining -= h;
    }
    if (remaining > 0.0) {
      if (release_u2 && (s_.pair_collided[0] || s_.pair_collided[1])) command[1] = 0.0;
      for (int i = 0; i < 3; ++i) advance(s_.x[i], s_.v[i], command[i], remaining, vmax[i]);
    }
  }

 private:
  // Touching pairs at equal speed whose accelerations would press them
  // together move as one body with the mass-weighted acceleration.
  void couple_resting(std::array<double, 3>& a) const {
    const auto& veh = sc_.vehicles;
    std::array<int, 3> group = {0, 1, 2};
    std::array<double, 3> accel = a;
    for (bool merged = true; merged;) {
      merged = false;
      for (Pair pair : {Pair::kFront, Pair::kRear}) {
        const int f = front_vehicle(pair);
        const int r = rear_vehicle(pair);
        if (group[f] == group[r] || s_.x[f] - s_.x[r] > kTouchGap || s_.v[f] != s_.v[r] ||
            !(accel[r] > accel[f])) {
          continue;
        }
        const int keep = group[f];
        const int drop = group[r];
        double mass = 0.0;
        double force = 0.0;
        for (int i = 0; i < 3; ++i) {
          if (group[i] == drop) group[i] = keep;
          if (group[i] == keep) {
            mass += veh[i].mass;
            force += veh[i].mass * a[i];
          }
        }
        for (int i = 0; i < 3; ++i) {
          if (group[i] == keep) accel[i] = force / mass;
        }
        merged = true;
      }
    }
    a = accel;
  }

  SimState& s_;
  const ScenarioConfig& sc_;
  StepResult& result_;
  int step_;
};

}  // namespace

StepResult step(const SimState& state, double u2_cmd, const ScenarioConfig& scenario,
                const StepOptions& options) {
  if (!std::isfinite(u2_cmd)) {
    throw std::invalid_argument("step: non-finite acceleration command");
  }
  const auto& veh = scenario.vehicles;
  const double t0 = state.n * scenario.dt;
  const double t1 = (state.n + 1) * scenario.dt;
  const bool active = control_active(state, scenario);

  StepResult result;
  result.u2_applied = active ? std::clamp(u2_cmd, -veh[1].decel_cap, veh[1].accel_cap) : 0.0;

  double cuts[4] = {t0, t1, t1, t1};
  int n_cuts = 2;
  if (inside(scenario.tau2, t0, t1)) cuts[n_cuts++] = scenario.tau2;
  if (inside(scenario.tau3, t0, t1)) cuts[n_cuts++] = scenario.tau3;
  std::sort(cuts, cuts + n_cuts);

  SimState next = state;
  next.n = state.n + 1;
  PeriodIntegrator integrator(next, scenario, result, next.n);
  for (int k = 0; k + 1 < n_cuts; ++k) {
    const double a = cuts[k];
    const double u2 = a >= scenario.tau2 - kTimeEps ? result.u2_applied : 0.0;
    const double u3 = a >= scenario.tau3 - kTimeEps ? -veh[2].decel_cap : 0.0;
    integrator.run({-veh[0].decel_cap, u2, u3}, cuts[k + 1] - a, options.release_on_collision);
  }
  integrator.resolve_contacts();
  if (active) next.last_u2 = result.u2_applied;
  result.state = next;
  return result;
}

Trajectory rollout(const ScenarioConfig& scenario, const Controller& controller,
                   const StepOptions& options) {
  Trajectory trajectory;
  SimState state = initial_state(scenario);
  trajectory.states.reserve(static_cast<std::size_t>(scenario.horizon) + 1);
  trajectory.states.push_back(state);
  for (int k = 0; k < scenario.horizon; ++k) {
    const double command = control_active(state, scenario) ? controller(state, scenario) : 0.0;
    StepResult result = step(state, command, scenario, options);
    trajectory.actions_u2.push_back(result.u2_applied);
    trajectory.events.insert(trajectory.events.end(), result.events.begin(),
                             result.events.end());
    state = result.state;
    trajectory.states.push_back(state);
    if (state.stopped()) break;
  }
  trajectory.terminated_at = state.n;
  return trajectory;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const ScenarioConfig& scenario) {
  out << "step,t,x1,x2,x3,v1,v2,v3,u2,d1,d2\n";
  for (std::size_t i = 0; i < trajectory.states.size(); ++i) {
    const SimState& s = trajectory.states[i];
    out << s.n << ',' << csv_number(time_at(s, scenario));
    for (double x : s.x) out << ',' << csv_number(x);
    for (double v : s.v) out << ',' << csv_number(v);
    out << ',';
    if (i < trajectory.actions_u2.size()) out << csv_number(trajectory.actions_u2[i]);
    out << ',' << csv_number(s.gap(Pair::kFront)) << ',' << csv_number(s.gap(Pair::kRear))
        << '\n';
  }
}

}  // namespace ebrake
