//! Plan on a scene, then re-check the trajectory at the verification rate
//! and print the report.
//!
//! `cargo run --release --example evaluate_plan -- platform`

use planeway::artifacts::to_canonical_json;
use planeway::config::RunConfig;
use planeway::extraction::extract_traversable_planes;
use planeway::pipeline::{evaluate_trajectory, plan, EvalTolerances, StageLog};
use planeway::scenes::{generate, SceneSpec};

fn main() -> planeway::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "platform".into());
    let config = RunConfig::default();
    let scene = generate(&SceneSpec::new(&name, 7))?;
    let planes = extract_traversable_planes(&scene.cloud, &config)?;
    let gt = &scene.ground_truth;
    let outcome = plan(&planes, &gt.start, &gt.goal, &config, None, StageLog::silent())?;
    let traj = &outcome.solution.trajectory;
    let report = evaluate_trajectory(traj, &planes, &config.robot, config.optimizer.check_rate_hz, EvalTolerances::from_config(&config))?;
    print!("{}", to_canonical_json(&report)?);
    Ok(())
}
