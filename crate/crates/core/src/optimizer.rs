//! Cross-plane trajectory optimization: an augmented-Lagrangian outer loop on
//! per-plane final positions, cubic penalties for the kinematic, orientation
//! and clearance limits, and an L-BFGS inner solver on the analytic gradient.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::Range;

use serde::Serialize;

use crate::config::{OptimizerConfig, RobotLimits};
use crate::error::{Error, Result};
use crate::geometry::{Segment3D, Vec2, Vec3};
use crate::graph::PathResult;
use crate::mapping::query_esdf;
use crate::plane::{PlaneKind, TraversablePlane};
use crate::trajectory::{
    basis, tau_from_time, time_from_tau, time_from_tau_grad, BoundaryState, CrossPlaneTrajectory, CrossingState,
    MincoSystem, TrajectoryPart, COEFFS,
};

/// Speed scale of the forward/backward blend.
const DIRECTION_BLEND: f64 = 0.05;
/// Smoothing of |v| inside the penalties; overestimates, so it is conservative.
const ABS_SMOOTHING: f64 = 1e-3;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Point on `segment` at proportion `sigmoid(eta)` and its derivative in `eta`.
pub fn crossing_point(eta: f64, segment: &Segment3D) -> (Vec3, Vec3) {
    let s = sigmoid(eta);
    let d = segment.b - segment.a;
    (segment.a + d * s, d * (s * (1.0 - s)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// Limit and yaw derivative on the half-ellipse with squared axis ratio `ratio`,
/// given `(sin, cos)` of the in-plane yaw.
fn half_ellipse(s: f64, c: f64, ratio: f64, v_max: f64) -> (f64, f64) {
    let root = (ratio * c * c + s * s).sqrt();
    (v_max * root, v_max * s * c * (1.0 - ratio) / root)
}

fn ellipse_limit(s: f64, c: f64, rr: f64, rd: f64, dir: Direction, v_max: f64) -> (f64, f64) {
    let climbing = (c >= 0.0) == (dir == Direction::Forward);
    half_ellipse(s, c, if climbing { rr } else { rd }, v_max)
}

/// Speed limit and its derivative in the in-plane yaw `theta_p`.
pub fn velocity_limit_grad(theta_p: f64, psi: f64, dir: Direction, limits: &RobotLimits) -> (f64, f64) {
    let (s, c) = theta_p.sin_cos();
    ellipse_limit(s, c, limits.r_r.eval(psi), limits.r_d.eval(psi), dir, limits.v_max)
}

/// Largest speed on a plane of inclination `psi` with in-plane yaw `theta_p`.
pub fn velocity_limit(theta_p: f64, psi: f64, dir: Direction, limits: &RobotLimits) -> f64 {
    velocity_limit_grad(theta_p, psi, dir, limits).0
}

/// Wrap an angle into `[-pi/2, pi/2)`.
pub fn wrap_half_pi(theta: f64) -> f64 {
    let w = (theta + FRAC_PI_2).rem_euclid(PI) - FRAC_PI_2;
    if w >= FRAC_PI_2 { w - PI } else { w }
}

/// Constraint values at one instant; every entry is `<= 0` when satisfied.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Residuals {
    pub c_v: f64,
    /// Speed/turn-rate coupling while moving forward, worst of both turn directions.
    pub c_m_plus: Option<f64>,
    /// The same while moving backward.
    pub c_m_minus: Option<f64>,
    /// Stair orientation, present only on stair planes.
    pub c_o: Option<f64>,
    pub c_s: f64,
}

/// Raw residuals for a state on `plane`.
pub fn residuals_at(plane: &TraversablePlane, limits: &RobotLimits, yaw: f64, v: f64, omega: f64, local: &Vec2) -> Residuals {
    let theta_p = yaw - plane.transform.heading();
    let dir = if v >= 0.0 { Direction::Forward } else { Direction::Backward };
    let vl = velocity_limit(theta_p, plane.inclination, dir, limits);
    let c_m = omega.abs() * vl + limits.omega_max * v.abs() - vl * limits.omega_max;
    let c_o = (plane.kind == PlaneKind::Stairs).then(|| {
        let w = wrap_half_pi(theta_p);
        w * w - limits.theta_s * limits.theta_s
    });
    Residuals {
        c_v: v.abs() - vl,
        c_m_plus: (dir == Direction::Forward).then_some(c_m),
        c_m_minus: (dir == Direction::Backward).then_some(c_m),
        c_o,
        c_s: limits.d_s - query_esdf(&plane.grid, local.x, local.y).value,
    }
}

/// Residuals of a trajectory at time `t`.
pub fn constraint_residuals(traj: &CrossPlaneTrajectory, planes: &[TraversablePlane], limits: &RobotLimits, t: f64) -> Result<Residuals> {
    let s = traj.world_state(t)?;
    Ok(residuals_at(&planes[s.plane], limits, s.yaw, s.v, s.omega, &s.local))
}

/// Worst value of one residual family and when it occurred.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Worst {
    pub value: f64,
    pub t: f64,
}

impl Worst {
    fn update(slot: &mut Option<Worst>, value: Option<f64>, t: f64) {
        if let Some(v) = value {
            if slot.is_none_or(|w| v > w.value) {
                *slot = Some(Worst { value: v, t });
            }
        }
    }
}

/// Maxima of every residual family over a dense sampling.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ResidualReport {
    pub c_v: Option<Worst>,
    pub c_m_plus: Option<Worst>,
    pub c_m_minus: Option<Worst>,
    pub c_o: Option<Worst>,
    pub c_s: Option<Worst>,
    pub samples: usize,
}

impl ResidualReport {
    /// Worst value over all families.
    pub fn max(&self) -> f64 {
        [self.c_v, self.c_m_plus, self.c_m_minus, self.c_o, self.c_s].iter().flatten().map(|w| w.value).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Which penalty families exceed `tol`: velocity, coupling, orientation, clearance.
    pub fn violated(&self, tol: f64) -> [bool; 4] {
        let over = |w: Option<Worst>| w.is_some_and(|w| w.value > tol);
        [over(self.c_v), over(self.c_m_plus) || over(self.c_m_minus), over(self.c_o), over(self.c_s)]
    }
}

/// Residual maxima at `rate_hz` over the whole trajectory.
pub fn dense_check(traj: &CrossPlaneTrajectory, planes: &[TraversablePlane], limits: &RobotLimits, rate_hz: f64) -> Result<ResidualReport> {
    let mut rep = ResidualReport::default();
    for (t, s) in traj.sample(rate_hz)? {
        let r = residuals_at(&planes[s.plane], limits, s.yaw, s.v, s.omega, &s.local);
        Worst::update(&mut rep.c_v, Some(r.c_v), t);
        Worst::update(&mut rep.c_m_plus, r.c_m_plus, t);
        Worst::update(&mut rep.c_m_minus, r.c_m_minus, t);
        Worst::update(&mut rep.c_o, r.c_o, t);
        Worst::update(&mut rep.c_s, Some(r.c_s), t);
        rep.samples += 1;
    }
    Ok(rep)
}

/// The optimization variables in structured form.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionVector {
    /// Interior joints of `[yaw, arc length]`.
    pub q: Vec<Vec2>,
    /// Unconstrained segment durations.
    pub tau: Vec<f64>,
    /// Unconstrained crossing proportions, one per plane change.
    pub eta: Vec<f64>,
    /// Terminal `[yaw, arc length]`, left free.
    pub sigma_f: Vec2,
}

impl DecisionVector {
    pub fn len(&self) -> usize {
        2 * self.q.len() + self.tau.len() + self.eta.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        out.extend(self.q.iter().flat_map(|v| [v.x, v.y]));
        out.extend_from_slice(&self.tau);
        out.extend_from_slice(&self.eta);
        out.extend([self.sigma_f.x, self.sigma_f.y]);
        out
    }
}

/// Multipliers and augmentation weight of the final-position constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    pub lambda: Vec<Vec2>,
    pub rho: f64,
}

/// One plane's share of the spline.
#[derive(Clone, Debug, PartialEq)]
pub struct PartSpec {
    pub plane: usize,
    pub segments: Range<usize>,
    pub delta_theta: f64,
    /// Climbing and descending speed ratios at the plane's inclination.
    pub ratios: (f64, f64),
}

/// Per-family penalty multipliers: velocity, coupling, orientation, clearance.
pub type PenaltyScale = [f64; 4];

/// Cost split of one evaluation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub jerk: f64,
    pub time: f64,
    pub penalty: f64,
    pub augmented: f64,
}

impl CostBreakdown {
    /// The objective without the augmentation terms.
    pub fn objective(&self) -> f64 {
        self.jerk + self.time + self.penalty
    }

    pub fn total(&self) -> f64 {
        self.objective() + self.augmented
    }
}

#[derive(Clone, Debug)]
struct EvalOut {
    cost: CostBreakdown,
    final_gaps: Vec<Vec2>,
}

/// A fixed plane sequence, crossing lines and endpoints to optimize over.
#[derive(Clone, Debug)]
pub struct Problem<'a> {
    pub planes: &'a [TraversablePlane],
    pub limits: RobotLimits,
    pub config: OptimizerConfig,
    pub parts: Vec<PartSpec>,
    /// Intersection segment between consecutive parts.
    pub lines: Vec<Segment3D>,
    pub start_local: Vec2,
    pub goal_local: Vec2,
    pub head: BoundaryState,
}

fn part_arc(poly: &[Vec2]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for w in poly.windows(2) {
        acc.push(acc.last().unwrap() + (w[1] - w[0]).norm());
    }
    acc
}

fn point_at_arc(poly: &[Vec2], arc: &[f64], u: f64) -> Vec2 {
    let u = u.clamp(0.0, *arc.last().unwrap());
    let k = arc.partition_point(|&a| a < u).clamp(1, poly.len() - 1);
    let span = arc[k] - arc[k - 1];
    if span <= 0.0 {
        return poly[k];
    }
    poly[k - 1] + (poly[k] - poly[k - 1]) * ((u - arc[k - 1]) / span)
}

/// Heading of the chord from `u - half` to `u + half` in plane coordinates.
fn chord_heading(poly: &[Vec2], arc: &[f64], u: f64, half: f64) -> Option<f64> {
    let d = point_at_arc(poly, arc, u + half) - point_at_arc(poly, arc, u - half);
    (d.norm() > 1e-9).then(|| d.y.atan2(d.x))
}

fn unwrap_near(angle: f64, reference: f64) -> f64 {
    angle + 2.0 * PI * ((reference - angle) / (2.0 * PI)).round()
}

impl<'a> Problem<'a> {
    /// Problem and initial guess from a searched route.
    pub fn from_path(planes: &'a [TraversablePlane], path: &PathResult, limits: &RobotLimits, config: &OptimizerConfig) -> Result<(Self, DecisionVector)> {
        if path.planes.is_empty() || path.polylines.len() != path.planes.len() || path.crossings.len() + 1 != path.planes.len() {
            return Err(Error::DegenerateInput("inconsistent route".into()));
        }
        let mut lines = Vec::new();
        for c in &path.crossings {
            let (lo, hi) = (c.from.min(c.to), c.from.max(c.to));
            let nb = planes[lo].neighbor(hi).ok_or_else(|| Error::DegenerateInput(format!("planes {lo} and {hi} are not adjacent")))?;
            lines.push(nb.segment.clone());
        }
        let half = 0.5 * config.segment_length;
        let mut parts = Vec::new();
        let mut q = Vec::new();
        let mut tau = Vec::new();
        let mut prev_heading: Option<f64> = None;
        let mut s_total = 0.0;
        let mut theta0 = 0.0;
        let mut theta_f = 0.0;
        let last = path.planes.len() - 1;
        for (ti, (&plane, poly)) in path.planes.iter().zip(&path.polylines).enumerate() {
            let pl = &planes[plane];
            let dt = pl.transform.heading();
            let arc = part_arc(poly);
            let len = *arc.last().unwrap();
            let m = ((len / config.segment_length).ceil() as usize).max(config.min_segments_per_plane);
            let first = tau.len();
            let heading = |u: f64, prev: &mut Option<f64>| -> f64 {
                let raw = chord_heading(poly, &arc, u, half).map(|a| a + dt).unwrap_or(prev.unwrap_or(dt));
                let a = prev.map_or(raw, |p| unwrap_near(raw, p));
                *prev = Some(a);
                a
            };
            let start_heading = heading(half.min(0.5 * len), &mut prev_heading);
            if ti == 0 {
                theta0 = start_heading;
            } else {
                // the joint at the crossing takes the mean of both sides
                let joint: &mut Vec2 = q.last_mut().unwrap();
                joint.x = 0.5 * (joint.x + start_heading);
            }
            let speed = 0.5 * limits.v_max * limits.r_r.eval(pl.inclination);
            let seg_len = (len / m as f64).max(0.05);
            for k in 1..=m {
                tau.push(tau_from_time((seg_len / speed).max(0.1)));
                let u = len * k as f64 / m as f64;
                let th = heading(if k == m { (len - half).max(0.5 * len) } else { u }, &mut prev_heading);
                if k < m || ti < last {
                    q.push(Vec2::new(th, s_total + u));
                } else {
                    theta_f = th;
                }
            }
            s_total += len;
            let ratios = (limits.r_r.eval(pl.inclination), limits.r_d.eval(pl.inclination));
            parts.push(PartSpec { plane, segments: first..tau.len(), delta_theta: dt, ratios });
        }
        let eta = path.crossings.iter().map(|c| logit(c.line_param.clamp(1e-3, 1.0 - 1e-3))).collect();
        let start_local = planes[path.planes[0]].to_local(&path.start);
        let goal_local = planes[path.planes[last]].to_local(&path.goal);
        let head = [Vec2::new(theta0, 0.0), Vec2::zeros(), Vec2::zeros()];
        let problem = Problem { planes, limits: limits.clone(), config: config.clone(), parts, lines, start_local, goal_local, head };
        let dv = DecisionVector { q, tau, eta, sigma_f: Vec2::new(theta_f, s_total) };
        Ok((problem, dv))
    }

    pub fn segment_count(&self) -> usize {
        self.parts.last().map_or(0, |p| p.segments.end)
    }

    pub fn dimension(&self) -> usize {
        let m = self.segment_count();
        2 * (m - 1) + m + self.lines.len() + 2
    }

    pub fn unpack(&self, x: &[f64]) -> Result<DecisionVector> {
        if x.len() != self.dimension() {
            return Err(Error::DegenerateInput(format!("decision vector has {} entries, expected {}", x.len(), self.dimension())));
        }
        let m = self.segment_count();
        let nq = 2 * (m - 1);
        let q = x[..nq].chunks(2).map(|c| Vec2::new(c[0], c[1])).collect();
        let tau = x[nq..nq + m].to_vec();
        let eta = x[nq + m..nq + m + self.lines.len()].to_vec();
        let sigma_f = Vec2::new(x[x.len() - 2], x[x.len() - 1]);
        Ok(DecisionVector { q, tau, eta, sigma_f })
    }

    fn spline_system(&self, dv: &DecisionVector) -> Result<MincoSystem> {
        let t: Vec<f64> = dv.tau.iter().map(|&v| time_from_tau(v)).collect();
        let tail = [dv.sigma_f, Vec2::zeros(), Vec2::zeros()];
        MincoSystem::solve(&self.head, &tail, &dv.q, &t)
    }

    /// Start of part `ti` in its own plane coordinates, and its derivative in the crossing eta.
    fn part_start(&self, ti: usize, eta: &[f64]) -> (Vec2, Vec2) {
        if ti == 0 {
            return (self.start_local, Vec2::zeros());
        }
        let (w, dw) = crossing_point(eta[ti - 1], &self.lines[ti - 1]);
        let tf = &self.planes[self.parts[ti].plane].transform;
        let l = tf.rotation.transpose() * dw;
        (tf.to_local_2d(&w), Vec2::new(l.x, l.y))
    }

    fn part_target(&self, ti: usize, eta: &[f64]) -> (Vec2, Vec2) {
        if ti + 1 == self.parts.len() {
            return (self.goal_local, Vec2::zeros());
        }
        let (w, dw) = crossing_point(eta[ti], &self.lines[ti]);
        let tf = &self.planes[self.parts[ti].plane].transform;
        let l = tf.rotation.transpose() * dw;
        (tf.to_local_2d(&w), Vec2::new(l.x, l.y))
    }

    /// Penalty at one sample with derivatives in yaw, turn rate, speed and position.
    fn penalty(&self, part: &PartSpec, scale: &PenaltyScale, yaw: f64, omega: f64, v: f64, p: &Vec2) -> (f64, f64, f64, f64, Vec2) {
        let cfg = &self.config;
        let lim = &self.limits;
        let plane = &self.planes[part.plane];
        let theta_p = yaw - part.delta_theta;
        let (mut cost, mut d_th, mut d_om, mut d_v, mut d_p) = (0.0, 0.0, 0.0, 0.0, Vec2::zeros());

        let (sn, cs) = theta_p.sin_cos();
        let (rr, rd) = part.ratios;
        let (vf, vf_d) = ellipse_limit(sn, cs, rr, rd, Direction::Forward, lim.v_max);
        let (vb, vb_d) = ellipse_limit(sn, cs, rr, rd, Direction::Backward, lim.v_max);
        let w = sigmoid(v / DIRECTION_BLEND);
        let w_d = w * (1.0 - w) / DIRECTION_BLEND;
        let vl = w * vf + (1.0 - w) * vb;
        let vl_th = w * vf_d + (1.0 - w) * vb_d;
        let vl_v = w_d * (vf - vb);
        let speed = (v * v + ABS_SMOOTHING * ABS_SMOOTHING).sqrt();
        let speed_v = v / speed;
        let keep = 1.0 - cfg.speed_margin;

        let c = speed - keep * vl;
        if c > 0.0 {
            let k = cfg.w_vel * scale[0];
            cost += k * c.powi(3);
            let g = 3.0 * k * c * c;
            d_v += g * (speed_v - keep * vl_v);
            d_th -= g * keep * vl_th;
        }
        for kappa in [-1.0, 1.0] {
            let c = speed / vl + kappa * omega / lim.omega_max - keep;
            if c > 0.0 {
                let k = cfg.w_mom * scale[1];
                cost += k * c.powi(3);
                let g = 3.0 * k * c * c;
                d_v += g * (speed_v / vl - speed / (vl * vl) * vl_v);
                d_th -= g * speed / (vl * vl) * vl_th;
                d_om += g * kappa / lim.omega_max;
            }
        }
        if plane.kind == PlaneKind::Stairs {
            let wp = wrap_half_pi(theta_p);
            let bound = (lim.theta_s - cfg.orient_margin).max(0.0);
            let c = wp * wp - bound * bound;
            if c > 0.0 {
                let k = cfg.w_orient * scale[2];
                cost += k * c.powi(3);
                d_th += 3.0 * k * c * c * 2.0 * wp;
            }
        }
        let e = query_esdf(&plane.grid, p.x, p.y);
        let c = lim.d_s + cfg.safe_margin - e.value;
        if c > 0.0 {
            let k = cfg.w_safe * scale[3];
            cost += k * c.powi(3);
            d_p -= e.gradient * (3.0 * k * c * c);
        }
        (cost, d_th, d_om, d_v, d_p)
    }

    fn eval_inner(&self, x: &[f64], dual: &DualState, scale: &PenaltyScale, grad: Option<&mut [f64]>) -> Result<EvalOut> {
        let dv = self.unpack(x)?;
        let sys = self.spline_system(&dv)?;
        let sp = &sys.spline;
        let cfg = &self.config;
        let m = sp.len();
        let n = cfg.n_quad;
        let nc = cfg.n_cons;
        let stride = n / nc;
        let want = grad.is_some();

        let mut gc = vec![[Vec2::zeros(); COEFFS]; m];
        let mut gt = vec![0.0; m];
        let mut g_eta = vec![0.0; self.lines.len()];
        let mut cost = CostBreakdown::default();

        for i in 0..m {
            cost.jerk += sp.segment_jerk_energy(i, &cfg.w_jerk);
            cost.time += cfg.eps_t * sp.durations[i];
            if want {
                let (g, dt) = sp.segment_jerk_grad(i, &cfg.w_jerk);
                for k in 0..COEFFS {
                    gc[i][k] += g[k];
                }
                gt[i] += dt + cfg.eps_t;
            }
        }

        let mut gaps = Vec::with_capacity(self.parts.len());
        let mut states: Vec<[Vec2; 3]> = Vec::new();
        let mut gpos: Vec<Vec2> = Vec::new();
        let half_n = n / 2;
        for (ti, part) in self.parts.iter().enumerate() {
            let (start, d_start) = self.part_start(ti, &dv.eta);
            let segs = part.segments.clone();
            let count = segs.len();
            // node states per segment: [yaw, arc], first and second derivatives
            states.clear();
            states.resize(count * (n + 1), [Vec2::zeros(); 3]);
            // position gradients from the clearance term, at even Simpson nodes
            gpos.clear();
            gpos.resize(count * (half_n + 1), Vec2::zeros());
            let mut p = start;
            let mut f = vec![Vec2::zeros(); n + 1];
            let mut pe = vec![Vec2::zeros(); half_n + 1];
            for (local, i) in segs.clone().enumerate() {
                let t_seg = sp.durations[i];
                let h = t_seg / n as f64;
                let st = &mut states[local * (n + 1)..(local + 1) * (n + 1)];
                for k in 0..=n {
                    st[k] = sp.state(i, k as f64 * h);
                    let phi = st[k][0].x - part.delta_theta;
                    f[k] = Vec2::new(phi.cos(), phi.sin()) * st[k][1].y;
                }
                pe[0] = p;
                for j in 0..half_n {
                    pe[j + 1] = pe[j] + (f[2 * j] + f[2 * j + 1] * 4.0 + f[2 * j + 2]) * (h / 3.0);
                }
                p = pe[half_n];
                let gp = &mut gpos[local * (half_n + 1)..(local + 1) * (half_n + 1)];
                for j in 0..=nc {
                    let node = j * stride;
                    let [s0, s1, s2] = st[node];
                    let (c, d_th, d_om, d_v, d_p) = self.penalty(part, scale, s0.x, s1.x, s1.y, &pe[node / 2]);
                    if c == 0.0 {
                        continue;
                    }
                    let end_weight = if j == 0 || j == nc { 0.5 } else { 1.0 };
                    let wt = t_seg / nc as f64 * end_weight;
                    cost.penalty += wt * c;
                    if want {
                        let tj = node as f64 * h;
                        let b0 = basis(tj, 0);
                        let b1 = basis(tj, 1);
                        for k in 0..COEFFS {
                            gc[i][k].x += wt * (d_th * b0[k] + d_om * b1[k]);
                            gc[i][k].y += wt * d_v * b1[k];
                        }
                        gt[i] += c / nc as f64 * end_weight;
                        gt[i] += wt * (d_th * s1.x + d_om * s2.x + d_v * s2.y) * (j as f64 / nc as f64);
                        gp[node / 2] += d_p * wt;
                    }
                }
            }

            let (target, d_target) = self.part_target(ti, &dv.eta);
            let gap = p - target;
            let lam = dual.lambda[ti];
            let shifted = gap + lam / dual.rho;
            cost.augmented += 0.5 * dual.rho * shifted.norm_squared();
            gaps.push(gap);
            if !want {
                continue;
            }
            let mu = gap * dual.rho + lam;
            if ti + 1 < self.parts.len() {
                g_eta[ti] -= mu.dot(&d_target);
            }

            // reverse sweep over the Simpson panels
            let mut adj = mu;
            let mut a = vec![Vec2::zeros(); n + 1];
            for (local, i) in segs.clone().enumerate().rev() {
                let t_seg = sp.durations[i];
                let h = t_seg / n as f64;
                let gp = &gpos[local * (half_n + 1)..(local + 1) * (half_n + 1)];
                let st = &states[local * (n + 1)..(local + 1) * (n + 1)];
                a.fill(Vec2::zeros());
                for j in (0..half_n).rev() {
                    adj += gp[j + 1];
                    let base = adj * (h / 3.0);
                    a[2 * j] += base;
                    a[2 * j + 1] += base * 4.0;
                    a[2 * j + 2] += base;
                }
                adj += gp[0];
                let mut via_h = 0.0;
                let mut via_t = 0.0;
                for k in 0..=n {
                    let tk = k as f64 * h;
                    let [s0, s1, s2] = st[k];
                    let (sn, cs) = (s0.x - part.delta_theta).sin_cos();
                    let g_v = a[k].x * cs + a[k].y * sn;
                    let g_th = (a[k].y * cs - a[k].x * sn) * s1.y;
                    via_h += g_v * s1.y;
                    let mut pw = 1.0;
                    for c in 0..COEFFS {
                        gc[i][c].x += g_th * pw;
                        if c + 1 < COEFFS {
                            gc[i][c + 1].y += g_v * (c + 1) as f64 * pw;
                        }
                        pw *= tk;
                    }
                    via_t += (g_th * s1.x + g_v * s2.y) * k as f64;
                }
                gt[i] += via_h / t_seg + via_t / n as f64;
            }
            if ti > 0 {
                g_eta[ti - 1] += adj.dot(&d_start);
            }
        }
        let total = cost.total();
        if !total.is_finite() {
            return Err(Error::NonFiniteValue("objective"));
        }
        if let Some(out) = grad {
            let sg = sys.propagate(&gc, &gt);
            let nq = 2 * (m - 1);
            for (j, w) in sg.waypoints.iter().enumerate() {
                out[2 * j] = w.x;
                out[2 * j + 1] = w.y;
            }
            for i in 0..m {
                out[nq + i] = sg.durations[i] * time_from_tau_grad(dv.tau[i]);
            }
            out[nq + m..nq + m + g_eta.len()].copy_from_slice(&g_eta);
            let l = out.len();
            out[l - 2] = sg.tail[0].x;
            out[l - 1] = sg.tail[0].y;
            if out.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue("gradient"));
            }
        }
        Ok(EvalOut { cost, final_gaps: gaps })
    }

    /// Augmented objective and its gradient over the flat decision vector.
    pub fn evaluate(&self, x: &[f64], dual: &DualState, scale: &PenaltyScale) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; x.len()];
        let out = self.eval_inner(x, dual, scale, Some(&mut g))?;
        Ok((out.cost.total(), g))
    }

    /// Cost terms and final-position gaps without the gradient.
    pub fn breakdown(&self, x: &[f64], dual: &DualState, scale: &PenaltyScale) -> Result<(CostBreakdown, Vec<Vec2>)> {
        let out = self.eval_inner(x, dual, scale, None)?;
        Ok((out.cost, out.final_gaps))
    }

    pub fn zero_dual(&self) -> DualState {
        DualState { lambda: vec![Vec2::zeros(); self.parts.len()], rho: self.config.rho0 }
    }

    /// Trajectory for a decision vector.
    pub fn assemble(&self, x: &[f64]) -> Result<CrossPlaneTrajectory> {
        let dv = self.unpack(x)?;
        let sys = self.spline_system(&dv)?;
        let parts = self
            .parts
            .iter()
            .enumerate()
            .map(|(ti, p)| TrajectoryPart {
                plane: p.plane,
                delta_theta: p.delta_theta,
                start_local: self.part_start(ti, &dv.eta).0,
                segments: p.segments.clone(),
                transform: self.planes[p.plane].transform.clone(),
            })
            .collect();
        let crossings = dv
            .eta
            .iter()
            .zip(&self.lines)
            .map(|(&eta, line)| CrossingState { eta, world_point: crossing_point(eta, line).0 })
            .collect();
        CrossPlaneTrajectory::new(sys.spline, parts, crossings, self.config.n_quad)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerStatus {
    Converged,
    Stalled,
    MaxIterations,
}

/// Result of one L-BFGS run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InnerReport {
    pub iterations: usize,
    pub evaluations: usize,
    pub value: f64,
    pub status: InnerStatus,
}

/// Limited-memory BFGS with a weak-Wolfe bracketing line search.
///
/// Stops when `|g|_inf <= grad_tol * max(1, |f|)`, when the line search can
/// make no progress, or after `max_iter` iterations.
pub fn lbfgs<F>(x: &mut [f64], mut f: F, max_iter: usize, grad_tol: f64, memory: usize) -> Result<InnerReport>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let n = x.len();
    let (mut fx, mut g) = f(x)?;
    let mut evals = 1;
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let inf_norm = |a: &[f64]| a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for it in 0..max_iter {
        if inf_norm(&g) <= grad_tol * fx.abs().max(1.0) {
            return Ok(InnerReport { iterations: it, evaluations: evals, value: fx, status: InnerStatus::Converged });
        }
        // two-loop recursion
        let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
        let k = s_hist.len();
        let mut alpha = vec![0.0; k];
        for j in (0..k).rev() {
            let rho = 1.0 / dot(&y_hist[j], &s_hist[j]);
            alpha[j] = rho * dot(&s_hist[j], &d);
            for (di, yi) in d.iter_mut().zip(&y_hist[j]) {
                *di -= alpha[j] * yi;
            }
        }
        if k > 0 {
            let gamma = dot(&s_hist[k - 1], &y_hist[k - 1]) / dot(&y_hist[k - 1], &y_hist[k - 1]);
            d.iter_mut().for_each(|v| *v *= gamma);
        } else {
            let scale = 1.0 / inf_norm(&g).max(1e-12);
            d.iter_mut().for_each(|v| *v *= scale.min(1.0));
        }
        for j in 0..k {
            let rho = 1.0 / dot(&y_hist[j], &s_hist[j]);
            let beta = rho * dot(&y_hist[j], &d);
            for (di, si) in d.iter_mut().zip(&s_hist[j]) {
                *di += (alpha[j] - beta) * si;
            }
        }
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            s_hist.clear();
            y_hist.clear();
            d = g.iter().map(|v| -v / inf_norm(&g).max(1e-12)).collect();
            slope = dot(&g, &d);
        }

        let (c1, c2) = (1e-4, 0.9);
        let (mut lo, mut hi) = (0.0, f64::INFINITY);
        let mut t = 1.0;
        let mut accepted: Option<(f64, Vec<f64>, Vec<f64>)> = None;
        let mut trial = vec![0.0; n];
        for _ in 0..60 {
            for i in 0..n {
                trial[i] = x[i] + t * d[i];
            }
            evals += 1;
            match f(&trial) {
                Ok((ft, gt)) if ft.is_finite() => {
                    if ft > fx + c1 * t * slope {
                        hi = t;
                    } else if dot(&gt, &d) < c2 * slope {
                        lo = t;
                        accepted = Some((ft, gt, trial.clone()));
                    } else {
                        accepted = Some((ft, gt, trial.clone()));
                        break;
                    }
                }
                _ => hi = t,
            }
            t = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * t };
            if hi.is_finite() && (hi - lo) < 1e-16 * hi.max(1.0) {
                break;
            }
        }
        let Some((fn_, gn, xn)) = accepted else {
            return Ok(InnerReport { iterations: it, evaluations: evals, value: fx, status: InnerStatus::Stalled });
        };
        let s: Vec<f64> = xn.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let progress = fx - fn_;
        x.copy_from_slice(&xn);
        fx = fn_;
        g = gn;
        if sy > 1e-12 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
            if s_hist.len() == memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
            s_hist.push(s);
            y_hist.push(y);
        }
        if progress <= 1e-15 * fx.abs().max(1.0) {
            return Ok(InnerReport { iterations: it + 1, evaluations: evals, value: fx, status: InnerStatus::Stalled });
        }
    }
    Ok(InnerReport { iterations: max_iter, evaluations: evals, value: fx, status: InnerStatus::MaxIterations })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

/// One outer iteration of the augmented-Lagrangian loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OuterLog {
    pub round: usize,
    pub outer: usize,
    pub inner: InnerReport,
    pub rho: f64,
    pub max_final_error: f64,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub trajectory: CrossPlaneTrajectory,
    pub status: SolveStatus,
    pub decision: DecisionVector,
    /// Distance between integrated and desired end point per part.
    pub final_errors: Vec<f64>,
    pub residuals: ResidualReport,
    pub initial_cost: CostBreakdown,
    pub final_cost: CostBreakdown,
    pub log: Vec<OuterLog>,
}

impl Solution {
    pub fn final_error(&self) -> f64 {
        self.final_errors.iter().fold(0.0, |m: f64, v| m.max(*v))
    }
}

const LBFGS_MEMORY: usize = 16;

/// Optimize from the initial guess `init`.
///
/// The outer loop updates the multipliers until every part ends within
/// `e_max` of its target; the result is then checked densely and the penalty
/// weights of violated families grow before another round.
pub fn solve(problem: &Problem<'_>, init: &DecisionVector) -> Result<Solution> {
    let cfg = &problem.config;
    let mut x = init.to_flat();
    let unit = [1.0; 4];
    let (initial_cost, _) = problem.breakdown(&x, &problem.zero_dual(), &unit)?;
    let mut dual = problem.zero_dual();
    let mut scale: PenaltyScale = unit;
    let mut log = Vec::new();
    let mut status = SolveStatus::MaxIterations;
    let mut residuals = ResidualReport::default();
    let mut gaps = Vec::new();
    for round in 0..=cfg.max_penalty_rounds {
        let mut reached = false;
        for outer in 0..cfg.max_outer {
            let inner = lbfgs(&mut x, |v| problem.evaluate(v, &dual, &scale), cfg.max_inner, cfg.grad_tol, LBFGS_MEMORY)?;
            let (cost, g) = problem.breakdown(&x, &dual, &scale)?;
            let worst = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
            log.push(OuterLog { round, outer, inner, rho: dual.rho, max_final_error: worst, objective: cost.objective() });
            gaps = g;
            if worst < cfg.e_max {
                reached = true;
                break;
            }
            for (l, c) in dual.lambda.iter_mut().zip(&gaps) {
                *l += c * dual.rho;
            }
            dual.rho = (dual.rho * cfg.rho_gamma).min(cfg.rho_max);
        }
        let traj = problem.assemble(&x)?;
        residuals = dense_check(&traj, problem.planes, &problem.limits, cfg.check_rate_hz)?;
        if !reached {
            break;
        }
        let violated = residuals.violated(cfg.tol_cons);
        if !violated.iter().any(|v| *v) {
            status = SolveStatus::Converged;
            break;
        }
        for (s, v) in scale.iter_mut().zip(violated) {
            if v {
                *s *= cfg.penalty_growth;
            }
        }
    }
    let (final_cost, _) = problem.breakdown(&x, &problem.zero_dual(), &unit)?;
    let trajectory = problem.assemble(&x)?;
    let final_errors = gaps.iter().map(|g| g.norm()).collect();
    Ok(Solution { trajectory, status, decision: problem.unpack(&x)?, final_errors, residuals, initial_cost, final_cost, log })
}
