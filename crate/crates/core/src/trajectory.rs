//! Motion-state trajectories: yaw and arc length as minimum-jerk quintic
//! splines of time, with plane-local positions recovered by quadrature.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::geometry::{Transform, Vec2, Vec3};

/// Coefficients per polynomial segment (quintic).
pub const COEFFS: usize = 6;

/// Unconstrained scalar to a strictly positive duration (C1, increasing).
pub fn time_from_tau(tau: f64) -> f64 {
    if tau > 0.0 { (0.5 * tau + 1.0) * tau + 1.0 } else { 2.0 / ((tau - 2.0) * tau + 2.0) }
}

/// Derivative of [`time_from_tau`].
pub fn time_from_tau_grad(tau: f64) -> f64 {
    if tau > 0.0 {
        tau + 1.0
    } else {
        let den = (tau - 2.0) * tau + 2.0;
        2.0 * (2.0 - 2.0 * tau) / (den * den)
    }
}

/// Inverse of [`time_from_tau`]; `t` must be positive.
pub fn tau_from_time(t: f64) -> f64 {
    if t > 1.0 { (2.0 * t - 1.0).sqrt() - 1.0 } else { 1.0 - (2.0 / t - 1.0).sqrt() }
}

/// Derivative-`d` row of the monomial basis `(1, t, ..., t^5)` at `t`.
pub fn basis(t: f64, d: usize) -> [f64; COEFFS] {
    let mut out = [0.0; COEFFS];
    for (k, o) in out.iter_mut().enumerate().skip(d) {
        let mut f = 1.0;
        for m in 0..d {
            f *= (k - m) as f64;
        }
        *o = f * t.powi((k - d) as i32);
    }
    out
}

/// Piecewise quintic over `[theta, s]`. Segment `i` holds `coeffs[i][k]`,
/// the coefficient of `t^k` for both components, with local time in `[0, T_i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MsSpline {
    pub durations: Vec<f64>,
    pub coeffs: Vec<[Vec2; COEFFS]>,
}

impl MsSpline {
    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.durations.iter().sum()
    }

    /// Derivative of order `d` of segment `i` at local time `t`.
    pub fn eval(&self, i: usize, t: f64, d: usize) -> Vec2 {
        let b = basis(t, d);
        let c = &self.coeffs[i];
        (0..COEFFS).fold(Vec2::zeros(), |acc, k| acc + c[k] * b[k])
    }

    /// Value, first and second derivative of segment `i` at local time `t`.
    pub fn state(&self, i: usize, t: f64) -> [Vec2; 3] {
        let c = &self.coeffs[i];
        let mut p = c[5];
        let mut v = c[5] * 5.0;
        let mut a = c[5] * 20.0;
        for k in (0..5).rev() {
            p = p * t + c[k];
            if k >= 1 {
                v = v * t + c[k] * k as f64;
            }
            if k >= 2 {
                a = a * t + c[k] * (k * (k - 1)) as f64;
            }
        }
        [p, v, a]
    }

    /// Segment index and local time for a global time, clamped to the domain.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let mut rest = t.max(0.0);
        for (i, &d) in self.durations.iter().enumerate() {
            if rest <= d || i + 1 == self.durations.len() {
                return (i, rest.min(d));
            }
            rest -= d;
        }
        (0, 0.0)
    }

    /// Weighted jerk energy of one segment, closed form.
    pub fn segment_jerk_energy(&self, i: usize, w: &[f64; 2]) -> f64 {
        let t = self.durations[i];
        let c = &self.coeffs[i];
        (0..2)
            .map(|d| {
                let (c3, c4, c5) = (c[3][d], c[4][d], c[5][d]);
                w[d] * (36.0 * c3 * c3 * t
                    + 144.0 * c3 * c4 * t.powi(2)
                    + (192.0 * c4 * c4 + 240.0 * c3 * c5) * t.powi(3)
                    + 720.0 * c4 * c5 * t.powi(4)
                    + 720.0 * c5 * c5 * t.powi(5))
            })
            .sum()
    }

    pub fn jerk_energy(&self, w: &[f64; 2]) -> f64 {
        (0..self.len()).map(|i| self.segment_jerk_energy(i, w)).sum()
    }

    /// Gradient of the segment jerk energy with respect to its coefficients and duration.
    pub fn segment_jerk_grad(&self, i: usize, w: &[f64; 2]) -> ([Vec2; COEFFS], f64) {
        let t = self.durations[i];
        let c = &self.coeffs[i];
        let mut gc = [Vec2::zeros(); COEFFS];
        for d in 0..2 {
            let (c3, c4, c5) = (c[3][d], c[4][d], c[5][d]);
            gc[3][d] = w[d] * (72.0 * c3 * t + 144.0 * c4 * t.powi(2) + 240.0 * c5 * t.powi(3));
            gc[4][d] = w[d] * (144.0 * c3 * t.powi(2) + 384.0 * c4 * t.powi(3) + 720.0 * c5 * t.powi(4));
            gc[5][d] = w[d] * (240.0 * c3 * t.powi(3) + 720.0 * c4 * t.powi(4) + 1440.0 * c5 * t.powi(5));
        }
        let j = self.eval(i, t, 3);
        (gc, w[0] * j.x * j.x + w[1] * j.y * j.y)
    }
}

/// Banded LU without pivoting, as used for minimum-control spline systems.
#[derive(Clone, Debug)]
struct BandedLu {
    n: usize,
    lower: usize,
    upper: usize,
    data: Vec<f64>,
}

impl BandedLu {
    fn new(n: usize, lower: usize, upper: usize) -> Self {
        Self { n, lower, upper, data: vec![0.0; n * (lower + upper + 1)] }
    }

    fn at(&mut self, i: usize, j: usize) -> &mut f64 {
        debug_assert!(j + self.lower >= i && j <= i + self.upper);
        let w = self.lower + self.upper + 1;
        &mut self.data[i * w + (j + self.lower - i)]
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.lower < i || j > i + self.upper {
            return 0.0;
        }
        let w = self.lower + self.upper + 1;
        self.data[i * w + (j + self.lower - i)]
    }

    fn factorize(&mut self) -> Result<()> {
        let w = self.lower + self.upper + 1;
        let (lower, n) = (self.lower, self.n);
        for k in 0..n {
            let pivot = self.data[k * w + lower];
            if pivot.abs() < 1e-300 || !pivot.is_finite() {
                return Err(Error::SingularSystem(format!("zero pivot at row {k}")));
            }
            let i_end = (k + lower + 1).min(n);
            let j_end = (k + self.upper + 1).min(n);
            let (head, tail) = self.data.split_at_mut((k + 1) * w);
            let row_k = &head[k * w..];
            for i in k + 1..i_end {
                // row i stores column j at offset j + lower - i
                let row_i = &mut tail[(i - k - 1) * w..(i - k) * w];
                let f = row_i[k + lower - i] / pivot;
                if f == 0.0 {
                    continue;
                }
                row_i[k + lower - i] = f;
                for j in k + 1..j_end {
                    row_i[j + lower - i] -= f * row_k[j + lower - k];
                }
            }
        }
        Ok(())
    }

    fn solve(&self, b: &mut [Vec2]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.lower);
            let mut acc = b[i];
            for j in lo..i {
                acc -= b[j] * self.get(i, j);
            }
            b[i] = acc;
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.upper + 1).min(self.n);
            let mut acc = b[i];
            for j in i + 1..hi {
                acc -= b[j] * self.get(i, j);
            }
            b[i] = acc / self.get(i, i);
        }
    }

    /// Solve with the transposed matrix: `U^T y = b`, then `L^T x = y`.
    fn solve_transposed(&self, b: &mut [Vec2]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.upper);
            let mut acc = b[i];
            for j in lo..i {
                acc -= b[j] * self.get(j, i);
            }
            b[i] = acc / self.get(i, i);
        }
        for i in (0..self.n).rev() {
            let hi = (i + self.lower + 1).min(self.n);
            let mut acc = b[i];
            for j in i + 1..hi {
                acc -= b[j] * self.get(j, i);
            }
            b[i] = acc;
        }
    }
}

/// Boundary position, velocity and acceleration of `[theta, s]`.
pub type BoundaryState = [Vec2; 3];

/// The factorized minimum-jerk system for one `(q, T)`; keeps what the
/// adjoint gradient pass needs.
#[derive(Clone, Debug)]
pub struct MincoSystem {
    lu: BandedLu,
    pub spline: MsSpline,
}

/// Gradients of a scalar cost with respect to the spline parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SplineGrad {
    pub waypoints: Vec<Vec2>,
    pub durations: Vec<f64>,
    pub tail: BoundaryState,
    pub head: BoundaryState,
}

impl MincoSystem {
    /// Unique minimum-jerk quintic through `q` with the given durations and boundary states.
    pub fn solve(head: &BoundaryState, tail: &BoundaryState, q: &[Vec2], durations: &[f64]) -> Result<Self> {
        let m = durations.len();
        if m == 0 || q.len() + 1 != m {
            return Err(Error::SingularSystem(format!("{} waypoints for {} segments", q.len(), m)));
        }
        if let Some(t) = durations.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(Error::SingularSystem(format!("non-positive duration {t}")));
        }
        let n = COEFFS * m;
        let mut a = BandedLu::new(n, COEFFS, COEFFS);
        let mut b = vec![Vec2::zeros(); n];
        *a.at(0, 0) = 1.0;
        *a.at(1, 1) = 1.0;
        *a.at(2, 2) = 2.0;
        b[0] = head[0];
        b[1] = head[1];
        b[2] = head[2];
        for i in 0..m - 1 {
            let t = durations[i];
            let (r, c) = (6 * i, 6 * i);
            let b3 = basis(t, 3);
            let b4 = basis(t, 4);
            let b0 = basis(t, 0);
            let b1 = basis(t, 1);
            let b2 = basis(t, 2);
            for k in 3..COEFFS {
                *a.at(r + 3, c + k) = b3[k];
            }
            *a.at(r + 3, c + 9) = -6.0;
            for k in 4..COEFFS {
                *a.at(r + 4, c + k) = b4[k];
            }
            *a.at(r + 4, c + 10) = -24.0;
            for k in 0..COEFFS {
                *a.at(r + 5, c + k) = b0[k];
                *a.at(r + 6, c + k) = b0[k];
            }
            *a.at(r + 6, c + 6) = -1.0;
            for k in 1..COEFFS {
                *a.at(r + 7, c + k) = b1[k];
            }
            *a.at(r + 7, c + 7) = -1.0;
            for k in 2..COEFFS {
                *a.at(r + 8, c + k) = b2[k];
            }
            *a.at(r + 8, c + 8) = -2.0;
            b[r + 5] = q[i];
        }
        let t = durations[m - 1];
        let r = n - 3;
        for d in 0..3 {
            let row = basis(t, d);
            for k in d..COEFFS {
                *a.at(r + d, n - 6 + k) = row[k];
            }
            b[r + d] = tail[d];
        }
        a.factorize()?;
        a.solve(&mut b);
        if b.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return Err(Error::NonFiniteValue("spline coefficients"));
        }
        let coeffs = b.chunks(COEFFS).map(|ch| [ch[0], ch[1], ch[2], ch[3], ch[4], ch[5]]).collect();
        Ok(Self { lu: a, spline: MsSpline { durations: durations.to_vec(), coeffs } })
    }

    /// Chain `dK/dc` and explicit `dK/dT` through the linear system.
    pub fn propagate(&self, grad_coeffs: &[[Vec2; COEFFS]], grad_durations: &[f64]) -> SplineGrad {
        let m = self.spline.len();
        let n = COEFFS * m;
        let mut g: Vec<Vec2> = grad_coeffs.iter().flat_map(|c| c.iter().copied()).collect();
        self.lu.solve_transposed(&mut g);
        let sp = &self.spline;
        let mut durations = grad_durations.to_vec();
        let mut waypoints = Vec::with_capacity(m - 1);
        for i in 0..m - 1 {
            let t = sp.durations[i];
            let r = 6 * i;
            let d1 = sp.eval(i, t, 1);
            let d2 = sp.eval(i, t, 2);
            let d3 = sp.eval(i, t, 3);
            let d4 = sp.eval(i, t, 4);
            let d5 = sp.eval(i, t, 5);
            durations[i] -= g[r + 3].dot(&d4) + g[r + 4].dot(&d5) + g[r + 5].dot(&d1) + g[r + 6].dot(&d1) + g[r + 7].dot(&d2) + g[r + 8].dot(&d3);
            waypoints.push(g[r + 5]);
        }
        let i = m - 1;
        let t = sp.durations[i];
        durations[i] -= g[n - 3].dot(&sp.eval(i, t, 1)) + g[n - 2].dot(&sp.eval(i, t, 2)) + g[n - 1].dot(&sp.eval(i, t, 3));
        SplineGrad { waypoints, durations, tail: [g[n - 3], g[n - 2], g[n - 1]], head: [g[0], g[1], g[2]] }
    }
}

/// Composite Simpson weights (without the `h/3` factor) for `n` subintervals.
pub fn simpson_weight(k: usize, n: usize) -> f64 {
    if k == 0 || k == n {
        1.0
    } else if k % 2 == 1 {
        4.0
    } else {
        2.0
    }
}

/// In-plane velocity `s_dot * (cos, sin)(theta - delta)` of segment `i` at local time `t`.
pub fn planar_velocity(spline: &MsSpline, i: usize, t: f64, delta_theta: f64) -> Vec2 {
    let [sigma, rate, _] = spline.state(i, t);
    let phi = sigma.x - delta_theta;
    Vec2::new(phi.cos(), phi.sin()) * rate.y
}

/// Displacement over `[0, t_end]` of segment `i` by composite Simpson with `n` subintervals.
pub fn integrate_segment(spline: &MsSpline, i: usize, t_end: f64, delta_theta: f64, n: usize) -> Vec2 {
    if t_end <= 0.0 {
        return Vec2::zeros();
    }
    let h = t_end / n as f64;
    let sum = (0..=n).fold(Vec2::zeros(), |acc, k| acc + planar_velocity(spline, i, k as f64 * h, delta_theta) * simpson_weight(k, n));
    sum * (h / 3.0)
}

/// Displacement of segment `i` between local times `t0 <= t1`.
pub fn integrate_between(spline: &MsSpline, i: usize, t0: f64, t1: f64, delta_theta: f64, n: usize) -> Vec2 {
    if t1 <= t0 {
        return Vec2::zeros();
    }
    let h = (t1 - t0) / n as f64;
    let sum = (0..=n).fold(Vec2::zeros(), |acc, k| acc + planar_velocity(spline, i, t0 + k as f64 * h, delta_theta) * simpson_weight(k, n));
    sum * (h / 3.0)
}

/// The stretch of the global spline driven on one plane.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPart {
    pub plane: usize,
    /// Heading of the plane's x-axis in the world frame.
    pub delta_theta: f64,
    pub start_local: Vec2,
    pub segments: Range<usize>,
    pub transform: Transform,
}

/// A plane change at a part boundary.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossingState {
    /// Unconstrained crossing parameter; the proportion along the line is its sigmoid.
    pub eta: f64,
    pub world_point: Vec3,
}

/// Sampled state of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorldState {
    pub position: Vec3,
    pub local: Vec2,
    pub yaw: f64,
    pub v: f64,
    pub omega: f64,
    pub plane: usize,
    pub part: usize,
}

/// One spline chain split into per-plane parts.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossPlaneTrajectory {
    pub spline: MsSpline,
    pub parts: Vec<TrajectoryPart>,
    pub crossings: Vec<CrossingState>,
    pub n_quad: usize,
    segment_starts: Vec<Vec2>,
    segment_times: Vec<f64>,
}

impl CrossPlaneTrajectory {
    pub fn new(spline: MsSpline, parts: Vec<TrajectoryPart>, crossings: Vec<CrossingState>, n_quad: usize) -> Result<Self> {
        if parts.is_empty() || parts.last().unwrap().segments.end != spline.len() || parts[0].segments.start != 0 {
            return Err(Error::DegenerateInput("parts must cover the spline".into()));
        }
        if parts.windows(2).any(|w| w[0].segments.end != w[1].segments.start || w[1].segments.is_empty()) || crossings.len() + 1 != parts.len() {
            return Err(Error::DegenerateInput("parts must be contiguous with one crossing between each pair".into()));
        }
        let mut segment_starts = vec![Vec2::zeros(); spline.len()];
        for part in &parts {
            let mut p = part.start_local;
            for i in part.segments.clone() {
                segment_starts[i] = p;
                p += integrate_segment(&spline, i, spline.durations[i], part.delta_theta, n_quad);
            }
        }
        let mut segment_times = Vec::with_capacity(spline.len());
        let mut acc = 0.0;
        for d in &spline.durations {
            segment_times.push(acc);
            acc += d;
        }
        Ok(Self { spline, parts, crossings, n_quad, segment_starts, segment_times })
    }

    pub fn duration(&self) -> f64 {
        self.spline.total_duration()
    }

    pub fn part_of_segment(&self, i: usize) -> usize {
        self.parts.iter().position(|p| p.segments.contains(&i)).unwrap_or(self.parts.len() - 1)
    }

    /// Start time of each part.
    pub fn part_start_time(&self, part: usize) -> f64 {
        self.segment_times[self.parts[part].segments.start]
    }

    /// Local end position of a part, as integrated.
    pub fn part_end_local(&self, part: usize) -> Vec2 {
        let p = &self.parts[part];
        let last = p.segments.end - 1;
        self.segment_starts[last] + integrate_segment(&self.spline, last, self.spline.durations[last], p.delta_theta, self.n_quad)
    }

    /// Plane-local position at global time `t`.
    pub fn local_position(&self, t: f64) -> Result<(usize, Vec2)> {
        let total = self.duration();
        if !(t >= -1e-12 && t <= total + 1e-9) {
            return Err(Error::OutOfDomain { t, total });
        }
        let (i, tl) = self.spline.locate(t);
        let part = self.part_of_segment(i);
        let p = self.segment_starts[i] + integrate_segment(&self.spline, i, tl, self.parts[part].delta_theta, self.n_quad);
        Ok((part, p))
    }

    /// Position, yaw, speed and turn rate at global time `t`.
    pub fn world_state(&self, t: f64) -> Result<WorldState> {
        let (part, local) = self.local_position(t)?;
        let (i, tl) = self.spline.locate(t);
        let sigma = self.spline.eval(i, tl, 0);
        let rate = self.spline.eval(i, tl, 1);
        let pt = &self.parts[part];
        Ok(WorldState { position: pt.transform.lift(&local), local, yaw: sigma.x, v: rate.y, omega: rate.x, plane: pt.plane, part })
    }

    /// Samples at a fixed rate including both end points. Positions are
    /// carried from sample to sample with one Simpson panel per step.
    pub fn sample(&self, rate_hz: f64) -> Result<Vec<(f64, WorldState)>> {
        let total = self.duration();
        let n = (total * rate_hz).ceil().max(1.0) as usize;
        let mut out = Vec::with_capacity(n + 1);
        let mut seg = 0;
        let mut part = 0;
        let mut last: Option<(usize, f64, Vec2)> = None;
        for k in 0..=n {
            let t = (k as f64 / rate_hz).min(total);
            while seg + 1 < self.spline.len() && t > self.segment_times[seg] + self.spline.durations[seg] {
                seg += 1;
            }
            while !self.parts[part].segments.contains(&seg) {
                part += 1;
            }
            let tl = (t - self.segment_times[seg]).clamp(0.0, self.spline.durations[seg]);
            let dth = self.parts[part].delta_theta;
            let local = match last {
                Some((ls, lt, lp)) if ls == seg => lp + integrate_between(&self.spline, seg, lt, tl, dth, 2),
                _ => self.segment_starts[seg] + integrate_between(&self.spline, seg, 0.0, tl, dth, 2),
            };
            last = Some((seg, tl, local));
            let [sigma, rate, _] = self.spline.state(seg, tl);
            let pt = &self.parts[part];
            out.push((t, WorldState { position: pt.transform.lift(&local), local, yaw: sigma.x, v: rate.y, omega: rate.x, plane: pt.plane, part }));
        }
        Ok(out)
    }
}
