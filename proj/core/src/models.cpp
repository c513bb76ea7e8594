#include "gprace/models.hpp"

#include "gprace/errors.hpp"

#include <cmath>

namespace gprace {

namespace {

using Vec4 = Eigen::Matrix<double, 4, 1>; // vx, vy, omega, delta
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat42 = Eigen::Matrix<double, 4, 2>;

double kinematic_slip(const VehicleParams& vp, double delta) {
    return std::atan(vp.lr / (vp.lf + vp.lr) * std::tan(delta));
}

LateralForces pacejka_from_components(const TireParams& tp, const VehicleParams& vp, double vx,
                                      double vy, double omega, double delta) {
    const double alpha_f = delta - std::atan((omega * vp.lf + vy) / vx);
    const double alpha_r = std::atan((omega * vp.lr - vy) / vx);
    LateralForces f;
    f.front = tp.Df * std::sin(tp.Cf * std::atan(tp.Bf * alpha_f));
    f.rear = tp.Dr * std::sin(tp.Cr * std::atan(tp.Br * alpha_r));
    return f;
}

// Velocity-subsystem right-hand side d(vx, vy, omega, delta)/dt.
// None of the model kinds reference the pose here.
Vec4 vel_rhs(ModelKind kind, const VehicleParams& vp, const TireParams& tp, const DriveParams& dp,
             const Vec4& z, const Input& u, LowSpeedPolicy policy) {
    const double vx = z[0], vy = z[1], omega = z[2], delta = z[3];
    Vec4 dz = Vec4::Zero();
    switch (kind) {
    case ModelKind::Kinematic: {
        dz[0] = longitudinal_force_simplified(dp, vx, u.d) / vp.m;
        dz[3] = u.ddelta;
        return dz;
    }
    case ModelKind::ExtendedKinematic: {
        const double ax = longitudinal_force_simplified(dp, vx, u.d) / vp.m;
        const double coupling = u.ddelta * vx + delta * ax;
        const double wheelbase = vp.lf + vp.lr;
        dz[0] = ax;
        dz[1] = vp.lr / wheelbase * coupling;
        dz[2] = coupling / wheelbase;
        dz[3] = u.ddelta;
        return dz;
    }
    case ModelKind::Dynamic: {
        if (std::abs(vx) < kLowSpeedVx) {
            if (policy == LowSpeedPolicy::Strict) {
                throw LowSpeedError("dynamic model undefined at |vx| < " + std::to_string(kLowSpeedVx));
            }
            return vel_rhs(ModelKind::ExtendedKinematic, vp, tp, dp, z, u, policy);
        }
        const double frx = longitudinal_force_full(dp, vx, u.d);
        const LateralForces fy = pacejka_from_components(tp, vp, vx, vy, omega, delta);
        dz[0] = (frx - fy.front * std::sin(delta)) / vp.m + vy * omega;
        dz[1] = (fy.rear + fy.front * std::cos(delta)) / vp.m - vx * omega;
        dz[2] = (fy.front * vp.lf * std::cos(delta) - fy.rear * vp.lr) / vp.Iz;
        dz[3] = u.ddelta;
        return dz;
    }
    }
    return dz;
}

// Jacobians of vel_rhs with respect to z and u.
void vel_jacobian(ModelKind kind, const VehicleParams& vp, const TireParams& tp,
                  const DriveParams& dp, const Vec4& z, const Input& u, LowSpeedPolicy policy,
                  Mat4& gz, Mat42& gu) {
    const double vx = z[0], vy = z[1], omega = z[2], delta = z[3];
    gz.setZero();
    gu.setZero();
    switch (kind) {
    case ModelKind::Kinematic: {
        gz(0, 0) = -dp.Cm2 * u.d / vp.m;
        gu(0, 0) = (dp.Cm1 - dp.Cm2 * vx) / vp.m;
        gu(3, 1) = 1;
        return;
    }
    case ModelKind::ExtendedKinematic: {
        const double wheelbase = vp.lf + vp.lr;
        const double ax = longitudinal_force_simplified(dp, vx, u.d) / vp.m;
        const double dax_dvx = -dp.Cm2 * u.d / vp.m;
        const double dax_dd = (dp.Cm1 - dp.Cm2 * vx) / vp.m;
        const double dc_dvx = u.ddelta + delta * dax_dvx;
        const double dc_ddelta_state = ax;
        const double dc_dd = delta * dax_dd;
        const double dc_dddelta = vx;
        gz(0, 0) = dax_dvx;
        gz(1, 0) = vp.lr / wheelbase * dc_dvx;
        gz(1, 3) = vp.lr / wheelbase * dc_ddelta_state;
        gz(2, 0) = dc_dvx / wheelbase;
        gz(2, 3) = dc_ddelta_state / wheelbase;
        gu(0, 0) = dax_dd;
        gu(1, 0) = vp.lr / wheelbase * dc_dd;
        gu(1, 1) = vp.lr / wheelbase * dc_dddelta;
        gu(2, 0) = dc_dd / wheelbase;
        gu(2, 1) = dc_dddelta / wheelbase;
        gu(3, 1) = 1;
        return;
    }
    case ModelKind::Dynamic: {
        if (std::abs(vx) < kLowSpeedVx) {
            if (policy == LowSpeedPolicy::Strict) {
                throw LowSpeedError("dynamic model undefined at |vx| < " + std::to_string(kLowSpeedVx));
            }
            vel_jacobian(ModelKind::ExtendedKinematic, vp, tp, dp, z, u, policy, gz, gu);
            return;
        }
        const double sd = std::sin(delta), cd = std::cos(delta);
        const LateralForces fy = pacejka_from_components(tp, vp, vx, vy, omega, delta);

        // Front slip angle alpha_f = delta - atan(p), p = (omega lf + vy)/vx.
        const double p = (omega * vp.lf + vy) / vx;
        const double dp_dvx = -(omega * vp.lf + vy) / (vx * vx);
        const double datan_p = 1.0 / (1.0 + p * p);
        const double daf_dvx = -datan_p * dp_dvx;
        const double daf_dvy = -datan_p / vx;
        const double daf_dw = -datan_p * vp.lf / vx;
        const double daf_ddelta = 1.0;

        // Rear slip angle alpha_r = atan(q), q = (omega lr - vy)/vx.
        const double q = (omega * vp.lr - vy) / vx;
        const double dq_dvx = -(omega * vp.lr - vy) / (vx * vx);
        const double datan_q = 1.0 / (1.0 + q * q);
        const double dar_dvx = datan_q * dq_dvx;
        const double dar_dvy = -datan_q / vx;
        const double dar_dw = datan_q * vp.lr / vx;

        const double alpha_f = delta - std::atan(p);
        const double alpha_r = std::atan(q);
        const double dffy_daf = tp.Df * std::cos(tp.Cf * std::atan(tp.Bf * alpha_f)) * tp.Cf * tp.Bf /
                                (1.0 + tp.Bf * tp.Bf * alpha_f * alpha_f);
        const double dfry_dar = tp.Dr * std::cos(tp.Cr * std::atan(tp.Br * alpha_r)) * tp.Cr * tp.Br /
                                (1.0 + tp.Br * tp.Br * alpha_r * alpha_r);

        const double dfrx_dvx = -dp.Cm2 * u.d - 2.0 * dp.Cd * vx;
        const double dfrx_dd = dp.Cm1 - dp.Cm2 * vx;

        // vdx = (Frx - Ffy sd)/m + vy w
        gz(0, 0) = (dfrx_dvx - dffy_daf * daf_dvx * sd) / vp.m;
        gz(0, 1) = (-dffy_daf * daf_dvy * sd) / vp.m + omega;
        gz(0, 2) = (-dffy_daf * daf_dw * sd) / vp.m + vy;
        gz(0, 3) = (-dffy_daf * daf_ddelta * sd - fy.front * cd) / vp.m;
        gu(0, 0) = dfrx_dd / vp.m;

        // vdy = (Fry + Ffy cd)/m - vx w
        gz(1, 0) = (dfry_dar * dar_dvx + dffy_daf * daf_dvx * cd) / vp.m - omega;
        gz(1, 1) = (dfry_dar * dar_dvy + dffy_daf * daf_dvy * cd) / vp.m;
        gz(1, 2) = (dfry_dar * dar_dw + dffy_daf * daf_dw * cd) / vp.m - vx;
        gz(1, 3) = (dffy_daf * daf_ddelta * cd - fy.front * sd) / vp.m;

        // wd = (Ffy lf cd - Fry lr)/Iz
        gz(2, 0) = (dffy_daf * daf_dvx * vp.lf * cd - dfry_dar * dar_dvx * vp.lr) / vp.Iz;
        gz(2, 1) = (dffy_daf * daf_dvy * vp.lf * cd - dfry_dar * dar_dvy * vp.lr) / vp.Iz;
        gz(2, 2) = (dffy_daf * daf_dw * vp.lf * cd - dfry_dar * dar_dw * vp.lr) / vp.Iz;
        gz(2, 3) = (dffy_daf * daf_ddelta * vp.lf * cd - fy.front * vp.lf * sd) / vp.Iz;

        gu(3, 1) = 1;
        return;
    }
    }
}

// One RK4 step of the velocity subsystem, with optional Jacobian chaining.
void rk4_vel(ModelKind kind, const VehicleParams& vp, const TireParams& tp, const DriveParams& dp,
             Vec4& z, const Input& u, double h, LowSpeedPolicy policy, Mat4* jz, Mat42* ju) {
    const Vec4 k1 = vel_rhs(kind, vp, tp, dp, z, u, policy);
    const Vec4 z2 = z + 0.5 * h * k1;
    const Vec4 k2 = vel_rhs(kind, vp, tp, dp, z2, u, policy);
    const Vec4 z3 = z + 0.5 * h * k2;
    const Vec4 k3 = vel_rhs(kind, vp, tp, dp, z3, u, policy);
    const Vec4 z4 = z + h * k3;
    const Vec4 k4 = vel_rhs(kind, vp, tp, dp, z4, u, policy);

    if (jz) {
        Mat4 g1z, g2z, g3z, g4z;
        Mat42 g1u, g2u, g3u, g4u;
        vel_jacobian(kind, vp, tp, dp, z, u, policy, g1z, g1u);
        vel_jacobian(kind, vp, tp, dp, z2, u, policy, g2z, g2u);
        vel_jacobian(kind, vp, tp, dp, z3, u, policy, g3z, g3u);
        vel_jacobian(kind, vp, tp, dp, z4, u, policy, g4z, g4u);

        const Mat4 j1z = g1z;
        const Mat42 j1u = g1u;
        const Mat4 j2z = g2z * (Mat4::Identity() + 0.5 * h * j1z);
        const Mat42 j2u = g2u + g2z * (0.5 * h * j1u);
        const Mat4 j3z = g3z * (Mat4::Identity() + 0.5 * h * j2z);
        const Mat42 j3u = g3u + g3z * (0.5 * h * j2u);
        const Mat4 j4z = g4z * (Mat4::Identity() + h * j3z);
        const Mat42 j4u = g4u + g4z * (h * j3u);

        const Mat4 step_jz = Mat4::Identity() + h / 6.0 * (j1z + 2.0 * j2z + 2.0 * j3z + j4z);
        const Mat42 step_ju = h / 6.0 * (j1u + 2.0 * j2u + 2.0 * j3u + j4u);
        *ju = step_jz * (*ju) + step_ju * 0; // placeholder, fixed below
        *ju = step_ju + step_jz * (*ju);     // never reached; see caller
        (void)step_ju;
        *jz = step_jz * (*jz);
    }

    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Integrands of cos(psi + w t) and sin(psi + w t) over [0, h], with series
// fallbacks that keep the map smooth through w = 0.
struct TwistTerms {
    double ic = 0, is = 0;       // integrals
    double dic_dw = 0, dis_dw = 0;
};

TwistTerms twist_terms(double psi, double w, double h) {
    const double uu = w * h;
    double g1, g2, dg1, dg2;
    if (std::abs(uu) < 1e-4) {
        const double u2 = uu * uu;
        g1 = 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
        g2 = uu / 2.0 - uu * u2 / 24.0 + uu * u2 * u2 / 720.0;
        dg1 = -uu / 3.0 + uu * u2 / 30.0;
        dg2 = 0.5 - u2 / 8.0 + u2 * u2 / 144.0;
    } else {
        g1 = std::sin(uu) / uu;
        g2 = (1.0 - std::cos(uu)) / uu;
        dg1 = (uu * std::cos(uu) - std::sin(uu)) / (uu * uu);
        dg2 = (uu * std::sin(uu) - 1.0 + std::cos(uu)) / (uu * uu);
    }
    const double cp = std::cos(psi), sp = std::sin(psi);
    TwistTerms t;
    t.ic = h * (cp * g1 - sp * g2);
    t.is = h * (sp * g1 + cp * g2);
    t.dic_dw = h * h * (cp * dg1 - sp * dg2);
    t.dis_dw = h * h * (sp * dg1 + cp * dg2);
    return t;
}

// Effective body twist (vbx, vby, yaw rate) driving the pose update, and its
// Jacobian with respect to (vx, vy, omega, delta).
struct EffectiveTwist {
    double vbx = 0, vby = 0, w = 0;
    Eigen::Matrix<double, 3, 4> jac = Eigen::Matrix<double, 3, 4>::Zero();
};

EffectiveTwist effective_twist(ModelKind kind, const VehicleParams& vp, const State& s) {
    EffectiveTwist e;
    if (kind == ModelKind::Kinematic) {
        const double beta = kinematic_slip(vp, s.delta);
        const double cb = std::cos(beta), sb = std::sin(beta);
        e.vbx = s.vx * cb;
        e.vby = s.vx * sb;
        e.w = s.vx * sb / vp.lr;
        const double k = vp.lr / (vp.lf + vp.lr);
        const double td = std::tan(s.delta);
        const double sec2 = 1.0 + td * td;
        const double dbeta = k * sec2 / (1.0 + k * k * td * td);
        e.jac(0, 0) = cb;
        e.jac(0, 3) = -s.vx * sb * dbeta;
        e.jac(1, 0) = sb;
        e.jac(1, 3) = s.vx * cb * dbeta;
        e.jac(2, 0) = sb / vp.lr;
        e.jac(2, 3) = s.vx * cb * dbeta / vp.lr;
    } else {
        e.vbx = s.vx;
        e.vby = s.vy;
        e.w = s.omega;
        e.jac(0, 0) = 1;
        e.jac(1, 1) = 1;
        e.jac(2, 2) = 1;
    }
    return e;
}

} // namespace

bool State::finite() const {
    return vec().allFinite();
}

double longitudinal_force_full(const DriveParams& dp, double vx, double d) {
    return (dp.Cm1 - dp.Cm2 * vx) * d - dp.Croll - dp.Cd * vx * vx;
}

double longitudinal_force_simplified(const DriveParams& dp, double vx, double d) {
    return (dp.Cm1 - dp.Cm2 * vx) * d;
}

LateralForces pacejka_lateral_forces(const TireParams& tp, const VehicleParams& vp, const State& s) {
    if (std::abs(s.vx) < kLowSpeedVx) {
        throw LowSpeedError("pacejka_lateral_forces: |vx| < " + std::to_string(kLowSpeedVx));
    }
    return pacejka_from_components(tp, vp, s.vx, s.vy, s.omega, s.delta);
}

StateVec derivative(ModelKind kind, const VehicleParams& vp, const TireParams& tp,
                    const DriveParams& dp, const State& s, const Input& u, LowSpeedPolicy policy) {
    StateVec d = StateVec::Zero();
    const Vec4 z(s.vx, s.vy, s.omega, s.delta);
    const Vec4 dz = vel_rhs(kind, vp, tp, dp, z, u, policy);
    if (kind == ModelKind::Kinematic) {
        const double beta = kinematic_slip(vp, s.delta);
        d[0] = s.vx * std::cos(s.psi + beta);
        d[1] = s.vx * std::sin(s.psi + beta);
        d[2] = s.vx * std::sin(beta) / vp.lr;
    } else {
        // Shared pose kinematics: identical formulas for the extended
        // kinematic and dynamic models.
        d[0] = s.vx * std::cos(s.psi) - s.vy * std::sin(s.psi);
        d[1] = s.vx * std::sin(s.psi) + s.vy * std::cos(s.psi);
        d[2] = s.omega;
    }
    d[3] = dz[0];
    d[4] = dz[1];
    d[5] = dz[2];
    d[6] = dz[3];
    return d;
}

State step(ModelKind kind, const VehicleParams& vp, const TireParams& tp, const DriveParams& dp,
           const State& s, const Input& u, double ts, int substeps, LowSpeedPolicy policy) {
    if (!(ts > 0)) throw Error("step: ts must be > 0");
    if (substeps < 1) throw Error("step: substeps must be >= 1");

    Vec4 z(s.vx, s.vy, s.omega, s.delta);
    const double h = ts / substeps;
    for (int i = 0; i < substeps; ++i) {
        rk4_vel(kind, vp, tp, dp, z, u, h, policy, nullptr, nullptr);
    }

    const EffectiveTwist tw = effective_twist(kind, vp, s);
    const TwistTerms t = twist_terms(s.psi, tw.w, ts);

    State out;
    out.x = s.x + tw.vbx * t.ic - tw.vby * t.is;
    out.y = s.y + tw.vbx * t.is + tw.vby * t.ic;
    out.psi = s.psi + tw.w * ts;
    out.vx = z[0];
    out.vy = z[1];
    out.omega = z[2];
    out.delta = z[3];
    if (!out.finite()) throw NumericError("step: integration produced non-finite state");
    return out;
}

StepJacobian step_jacobian(ModelKind kind, const VehicleParams& vp, const TireParams& tp,
                           const DriveParams& dp, const State& s, const Input& u, double ts,
                           int substeps, LowSpeedPolicy policy) {
    StepJacobian j;
    j.a.setZero();
    j.b.setZero();

    // Velocity block: chain RK4 substeps.
    Vec4 z(s.vx, s.vy, s.omega, s.delta);
    Mat4 jz = Mat4::Identity();
    Mat42 ju = Mat42::Zero();
    const double h = ts / substeps;
    for (int i = 0; i < substeps; ++i) {
        const Vec4 k1 = vel_rhs(kind, vp, tp, dp, z, u, policy);
        const Vec4 z2 = z + 0.5 * h * k1;
        const Vec4 k2 = vel_rhs(kind, vp, tp, dp, z2, u, policy);
        const Vec4 z3 = z + 0.5 * h * k2;
        const Vec4 k3 = vel_rhs(kind, vp, tp, dp, z3, u, policy);
        const Vec4 z4 = z + h * k3;
        const Vec4 k4 = vel_rhs(kind, vp, tp, dp, z4, u, policy);

        Mat4 g1z, g2z, g3z, g4z;
        Mat42 g1u, g2u, g3u, g4u;
        vel_jacobian(kind, vp, tp, dp, z, u, policy, g1z, g1u);
        vel_jacobian(kind, vp, tp, dp, z2, u, policy, g2z, g2u);
        vel_jacobian(kind, vp, tp, dp, z3, u, policy, g3z, g3u);
        vel_jacobian(kind, vp, tp, dp, z4, u, policy, g4z, g4u);

        const Mat4 j1z = g1z;
        const Mat42 j1u = g1u;
        const Mat4 j2z = g2z * (Mat4::Identity() + 0.5 * h * j1z);
        const Mat42 j2u = g2u + g2z * (0.5 * h * j1u);
        const Mat4 j3z = g3z * (Mat4::Identity() + 0.5 * h * j2z);
        const Mat42 j3u = g3u + g3z * (0.5 * h * j2u);
        const Mat4 j4z = g4z * (Mat4::Identity() + h * j3z);
        const Mat42 j4u = g4u + g4z * (h * j3u);

        const Mat4 step_jz = Mat4::Identity() + h / 6.0 * (j1z + 2.0 * j2z + 2.0 * j3z + j4z);
        const Mat42 step_ju = h / 6.0 * (j1u + 2.0 * j2u + 2.0 * j3u + j4u);
        ju = step_jz * ju + step_ju;
        jz = step_jz * jz;

        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    j.a.block<4, 4>(3, 3) = jz;
    j.b.block<4, 2>(3, 0) = ju;

    // Pose block: exact twist under start-of-step velocities.
    const EffectiveTwist tw = effective_twist(kind, vp, s);
    const TwistTerms t = twist_terms(s.psi, tw.w, ts);

    j.a(0, 0) = 1;
    j.a(1, 1) = 1;
    j.a(2, 2) = 1;

    const double dx = tw.vbx * t.ic - tw.vby * t.is;
    const double dy = tw.vbx * t.is + tw.vby * t.ic;
    // d/dpsi of the integrals rotates them by 90 degrees.
    j.a(0, 2) = -dy;
    j.a(1, 2) = dx;

    // Chain through the effective twist components.
    Eigen::Matrix<double, 2, 3> dpos_dtwist; // wrt (vbx, vby, w)
    dpos_dtwist << t.ic, -t.is, tw.vbx * t.dic_dw - tw.vby * t.dis_dw,
                   t.is,  t.ic, tw.vbx * t.dis_dw + tw.vby * t.dic_dw;
    const Eigen::Matrix<double, 2, 4> dpos_dvel = dpos_dtwist * tw.jac;
    j.a.block<2, 4>(0, 3) = dpos_dvel;
    j.a.block<1, 4>(2, 3) = ts * tw.jac.row(2);

    return j;
}

} // namespace gprace
