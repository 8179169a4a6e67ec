//! Minimum-jerk spline over (yaw, arc length) and the planar position it
//! integrates to.
//!
//! `cargo run --example min_jerk_spline`

use planeway::geometry::Vec2;
use planeway::trajectory::{integrate_segment, MincoSystem};

fn main() -> planeway::Result<()> {
    let head = [Vec2::zeros(), Vec2::zeros(), Vec2::zeros()];
    let tail = [Vec2::new(1.2, 3.0), Vec2::zeros(), Vec2::zeros()];
    let q = [Vec2::new(0.2, 0.8), Vec2::new(0.9, 1.9)];
    let durations = [1.4, 1.2, 1.5];
    let sys = MincoSystem::solve(&head, &tail, &q, &durations)?;
    let sp = &sys.spline;
    println!("jerk energy {:.4}", sp.jerk_energy(&[1.0, 1.0]));

    let mut position = Vec2::zeros();
    for i in 0..sp.len() {
        let t = sp.durations[i];
        let end = sp.eval(i, t, 0);
        position += integrate_segment(sp, i, t, 0.0, 16);
        println!("segment {i}: T={t:.2} s  yaw {:+.3} rad  s {:.3} m  -> position ({:.3}, {:.3})", end.x, end.y, position.x, position.y);
    }
    let fine: Vec2 = (0..sp.len()).map(|i| integrate_segment(sp, i, sp.durations[i], 0.0, 512)).sum();
    println!("16 vs 512 subintervals: {:.2e} m", (fine - position).norm());
    Ok(())
}
