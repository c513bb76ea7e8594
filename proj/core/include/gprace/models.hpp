#pragma once

#include "gprace/config.hpp"

#include <Eigen/Dense>

namespace gprace {

/// Planar single-track vehicle state.
/// Ordering matches the 7-vector layout used throughout: x, y, psi, vx, vy, omega, delta.
struct State {
    double x = 0;     ///< inertial position, m
    double y = 0;     ///< inertial position, m
    double psi = 0;   ///< heading, rad
    double vx = 0;    ///< longitudinal body velocity, m/s
    double vy = 0;    ///< lateral body velocity, m/s
    double omega = 0; ///< yaw rate, rad/s
    double delta = 0; ///< steering angle, rad

    Eigen::Matrix<double, 7, 1> vec() const {
        Eigen::Matrix<double, 7, 1> v;
        v << x, y, psi, vx, vy, omega, delta;
        return v;
    }
    static State from_vec(const Eigen::Matrix<double, 7, 1>& v) {
        return State{v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
    }
    bool finite() const;
};

/// Actuation: PWM duty cycle and steering rate.
struct Input {
    double d = 0;      ///< duty cycle
    double ddelta = 0; ///< steering rate, rad/s
};

using StateVec = Eigen::Matrix<double, 7, 1>;

enum class ModelKind {
    Kinematic,
    ExtendedKinematic,
    Dynamic,
};

/// Behavior of the dynamic model below the low-speed threshold, where the
/// tire slip angles are undefined.
enum class LowSpeedPolicy {
    Fallback, ///< evaluate the extended kinematic right-hand side instead
    Strict,   ///< throw LowSpeedError
};

/// Below this |vx| the Pacejka slip angles are considered undefined.
inline constexpr double kLowSpeedVx = 0.1;

/// Rear longitudinal drivetrain force with rolling and drag resistance:
/// (Cm1 - Cm2 vx) d - Croll - Cd vx^2.
double longitudinal_force_full(const DriveParams& dp, double vx, double d);

/// Drivetrain force with resistance terms dropped: (Cm1 - Cm2 vx) d.
double longitudinal_force_simplified(const DriveParams& dp, double vx, double d);

struct LateralForces {
    double front = 0; ///< N
    double rear = 0;  ///< N
};

/// Front/rear lateral tire forces from the Pacejka magic formula.
/// Throws LowSpeedError when |vx| < kLowSpeedVx.
LateralForces pacejka_lateral_forces(const TireParams& tp, const VehicleParams& vp, const State& s);

/// Continuous-time right-hand side of the selected model.
///
/// The kinematic and extended kinematic models drive with the simplified
/// longitudinal force, the dynamic model with the full one. With the default
/// policy the dynamic model evaluates the extended kinematic right-hand side
/// when |vx| < kLowSpeedVx; with LowSpeedPolicy::Strict it throws instead.
StateVec derivative(ModelKind kind, const VehicleParams& vp, const TireParams& tp,
                    const DriveParams& dp, const State& s, const Input& u,
                    LowSpeedPolicy policy = LowSpeedPolicy::Fallback);

/// One discrete step of length ts.
///
/// Split scheme: the velocity states (vx, vy, omega, delta) are integrated
/// with fixed-step RK4 using `substeps` stages; the pose (x, y, psi) advances
/// by the exact constant-twist solution under the body velocities held at
/// their start-of-step values. All model kinds share the same pose update
/// formula, so single-step predictions from matched initial states differ
/// only in the velocity states.
State step(ModelKind kind, const VehicleParams& vp, const TireParams& tp, const DriveParams& dp,
           const State& s, const Input& u, double ts, int substeps = 1,
           LowSpeedPolicy policy = LowSpeedPolicy::Fallback);

/// Jacobian of the discrete step map: A = d(next)/d(state), B = d(next)/d(input).
struct StepJacobian {
    Eigen::Matrix<double, 7, 7> a;
    Eigen::Matrix<double, 7, 2> b;
};

StepJacobian step_jacobian(ModelKind kind, const VehicleParams& vp, const TireParams& tp,
                           const DriveParams& dp, const State& s, const Input& u, double ts,
                           int substeps = 1, LowSpeedPolicy policy = LowSpeedPolicy::Fallback);

/// A discrete-time prediction model, as consumed by the MPC solver.
class DiscreteModel {
public:
    virtual ~DiscreteModel() = default;
    virtual State step(const State& s, const Input& u) const = 0;
    virtual StepJacobian jacobian(const State& s, const Input& u) const = 0;
    virtual double ts() const = 0;
};

/// DiscreteModel backed directly by one of the three analytic models.
class NominalModel final : public DiscreteModel {
public:
    NominalModel(ModelKind kind, VehicleParams vp, TireParams tp, DriveParams dp, double ts,
                 int substeps = 1, LowSpeedPolicy policy = LowSpeedPolicy::Fallback)
        : kind_(kind), vp_(vp), tp_(tp), dp_(dp), ts_(ts), substeps_(substeps), policy_(policy) {}

    State step(const State& s, const Input& u) const override {
        return gprace::step(kind_, vp_, tp_, dp_, s, u, ts_, substeps_, policy_);
    }
    StepJacobian jacobian(const State& s, const Input& u) const override {
        return gprace::step_jacobian(kind_, vp_, tp_, dp_, s, u, ts_, substeps_, policy_);
    }
    double ts() const override { return ts_; }
    ModelKind kind() const { return kind_; }

private:
    ModelKind kind_;
    VehicleParams vp_;
    TireParams tp_;
    DriveParams dp_;
    double ts_;
    int substeps_;
    LowSpeedPolicy policy_;
};

} // namespace gprace
