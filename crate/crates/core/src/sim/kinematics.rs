//! Closed-form cart motion: trapezoidal velocity profiles with constant
//! acceleration, degrading to triangular profiles on short hops.
//!
//! A profile is planned once (at dispatch or at a stop) and then sampled at
//! infra-step boundaries, so positions are exact integrals of the velocity
//! curve rather than accumulated Euler steps.

/// Distance needed to brake from speed `v` to rest at acceleration `a`.
pub fn brake_distance(v: f64, a: f64) -> f64 {
    v * v / (2.0 * a)
}

/// Travel time from rest over `distance` meters, closed form.
pub fn travel_time_from_rest(distance: f64, vmax: f64, a: f64) -> f64 {
    let d = distance.abs();
    let d_ramp = vmax * vmax / a; // accelerate + decelerate span
    if d >= d_ramp {
        2.0 * vmax / a + (d - d_ramp) / vmax
    } else {
        2.0 * (d / a).sqrt()
    }
}

/// One planned run from a start state to a full stop at a target position.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionProfile {
    start_pos: f64,
    target_pos: f64,
    /// +1.0 towards higher positions, -1.0 towards lower.
    dir: f64,
    /// Speed along `dir` at plan time (>= 0).
    v0: f64,
    accel: f64,
    /// Segment durations: ramp-up, cruise, ramp-down.
    t_acc: f64,
    t_cruise: f64,
    t_dec: f64,
    /// Peak speed reached during the run.
    v_peak: f64,
}

impl MotionProfile {
    /// Plan a run from `(start_pos, v0_signed)` to a stop at `target_pos`.
    ///
    /// `v0_signed` must point towards the target (or be zero) and the target
    /// must be at or beyond the braking point; both hold for every call site
    /// because re-targeting is only ever done to reachable stops.
    pub fn plan(start_pos: f64, v0_signed: f64, target_pos: f64, vmax: f64, accel: f64) -> Self {
        let dir = if target_pos >= start_pos { 1.0 } else { -1.0 };
        let d = (target_pos - start_pos).abs();
        let v0 = (v0_signed * dir).max(0.0).min(vmax);
        debug_assert!(
            brake_distance(v0, accel) <= d + 1e-9,
            "target inside braking distance"
        );
        let v_peak_unclamped = (accel * d + v0 * v0 / 2.0).sqrt();
        let (v_peak, t_acc, t_cruise, t_dec);
        if v_peak_unclamped <= vmax {
            v_peak = v_peak_unclamped;
            t_acc = (v_peak - v0) / accel;
            t_cruise = 0.0;
            t_dec = v_peak / accel;
        } else {
            v_peak = vmax;
            let d_acc = (vmax * vmax - v0 * v0) / (2.0 * accel);
            let d_dec = brake_distance(vmax, accel);
            t_acc = (vmax - v0) / accel;
            t_cruise = (d - d_acc - d_dec) / vmax;
            t_dec = vmax / accel;
        }
        Self {
            start_pos,
            target_pos,
            dir,
            v0,
            accel,
            t_acc,
            t_cruise: t_cruise.max(0.0),
            t_dec,
            v_peak,
        }
    }

    /// Total run duration in seconds.
    pub fn duration(&self) -> f64 {
        self.t_acc + self.t_cruise + self.t_dec
    }

    pub fn target_pos(&self) -> f64 {
        self.target_pos
    }

    /// Signed direction of travel (+1 up, -1 down).
    pub fn direction_sign(&self) -> f64 {
        self.dir
    }

    /// Sample position and signed velocity `tau` seconds after the start of
    /// the run. Past the end of the run the cart rests at the target.
    pub fn eval(&self, tau: f64) -> (f64, f64) {
        let a = self.accel;
        if tau <= 0.0 {
            return (self.start_pos, self.v0 * self.dir);
        }
        if tau >= self.duration() {
            return (self.target_pos, 0.0);
        }
        let (s, v) = if tau < self.t_acc {
            let v = self.v0 + a * tau;
            (self.v0 * tau + 0.5 * a * tau * tau, v)
        } else {
            let s_acc = self.v0 * self.t_acc + 0.5 * a * self.t_acc * self.t_acc;
            let t = tau - self.t_acc;
            if t < self.t_cruise {
                (s_acc + self.v_peak * t, self.v_peak)
            } else {
                let s_cruise = s_acc + self.v_peak * self.t_cruise;
                let t = t - self.t_cruise;
                (
                    s_cruise + self.v_peak * t - 0.5 * a * t * t,
                    self.v_peak - a * t,
                )
            }
        };
        let v = v.clamp(0.0, self.v_peak);
        (self.start_pos + self.dir * s, self.dir * v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const VMAX: f64 = 2.5;
    const ACC: f64 = 1.0;

    #[test]
    fn long_hop_is_trapezoidal() {
        // 10 floors at 3.3 m: d = 33 m >= vmax^2/a = 6.25 m.
        let p = MotionProfile::plan(0.0, 0.0, 33.0, VMAX, ACC);
        // closed form: 2*vmax/a + (d - vmax^2/a)/vmax = 5 + 26.75/2.5 = 15.7
        assert_abs_diff_eq!(p.duration(), 15.7, epsilon = 1e-12);
        assert_abs_diff_eq!(p.duration(), travel_time_from_rest(33.0, VMAX, ACC));
        let (pos, vel) = p.eval(p.duration());
        assert_eq!((pos, vel), (33.0, 0.0));
        // mid-cruise speed is exactly vmax
        let (_, v) = p.eval(7.0);
        assert_abs_diff_eq!(v, VMAX, epsilon = 1e-12);
    }

    #[test]
    fn short_hop_is_triangular() {
        // one floor: d = 3.3 < 6.25 -> triangular, t = 2*sqrt(d/a)
        let p = MotionProfile::plan(3.3, 0.0, 0.0, VMAX, ACC);
        assert_abs_diff_eq!(p.duration(), 2.0 * (3.3f64).sqrt(), epsilon = 1e-12);
        let (_, v) = p.eval(p.duration() / 2.0);
        assert_abs_diff_eq!(v.abs(), (3.3f64).sqrt(), epsilon = 1e-9);
        assert!(v < 0.0, "downward run has negative velocity");
    }

    #[test]
    fn speed_never_exceeds_limit() {
        for &(from, to) in &[(0.0, 49.5), (49.5, 0.0), (3.3, 6.6), (0.0, 0.4)] {
            let p = MotionProfile::plan(from, 0.0, to, VMAX, ACC);
            let steps = (p.duration() / 0.1).ceil() as usize + 3;
            for k in 0..steps {
                let (_, v) = p.eval(k as f64 * 0.1);
                assert!(v.abs() <= VMAX + 1e-12);
            }
        }
    }

    #[test]
    fn replan_from_flight_matches_tail() {
        // Plan a long run, sample it mid-flight, re-plan from that state:
        // remaining duration must equal original minus elapsed.
        let p = MotionProfile::plan(0.0, 0.0, 33.0, VMAX, ACC);
        for &tau in &[0.4, 1.2, 2.5, 7.0, 12.3] {
            let (pos, vel) = p.eval(tau);
            let tail = MotionProfile::plan(pos, vel, 33.0, VMAX, ACC);
            assert_abs_diff_eq!(tail.duration(), p.duration() - tau, epsilon = 1e-9);
        }
    }

    #[test]
    fn position_is_continuous_across_steps() {
        let p = MotionProfile::plan(0.0, 0.0, 12.7, VMAX, ACC);
        let mut prev = p.eval(0.0).0;
        let mut tau = 0.0;
        while tau < p.duration() + 0.5 {
            tau += 0.1;
            let (pos, _) = p.eval(tau);
            assert!((pos - prev).abs() <= VMAX * 0.1 + 1e-9);
            assert!(pos >= prev - 1e-12, "monotone towards target");
            prev = pos;
        }
        assert_eq!(prev, 12.7);
    }
}
