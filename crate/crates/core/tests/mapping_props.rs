mod common;

use proptest::prelude::*;

use planeway::config::RunConfig;
use planeway::geometry::Vec2;
use planeway::mapping::{compute_esdf, interline_dilation, query_esdf, CellState, GridMap};

const STATES: [CellState; 6] = [CellState::Unknown, CellState::Safe, CellState::Interline, CellState::Overlap, CellState::Boundary, CellState::Occupied];

fn grid_from(codes: &[usize], w: usize, h: usize, res: f64) -> GridMap {
    let mut g = GridMap::new(res, Vec2::new(-0.3, 1.7), w, h);
    for (k, &c) in codes.iter().enumerate() {
        g.states[k] = STATES[c];
    }
    compute_esdf(&mut g);
    g
}

/// Mostly free cells with a sprinkling of obstacles.
fn sparse_states(n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(prop_oneof![8 => 1..4usize, 1 => Just(0usize), 1 => 4..6usize], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_cells_are_one_lipschitz(codes in sparse_states(24 * 18)) {
        let g = grid_from(&codes, 24, 18, 0.1);
        let free = |i: usize, j: usize| !g.state(i, j).is_obstacle();
        for j in 0..g.height {
            for i in 0..g.width {
                for (di, dj) in [(1usize, 0usize), (0, 1), (1, 1)] {
                    let (a, b) = (i + di, j + dj);
                    if a >= g.width || b >= g.height || !free(i, j) || !free(a, b) {
                        continue;
                    }
                    let step = g.resolution * ((di * di + dj * dj) as f64).sqrt();
                    let slope = (g.esdf[g.index(i, j)] - g.esdf[g.index(a, b)]).abs() / step;
                    prop_assert!(slope <= 1.0 + 1e-9, "slope {} at ({}, {})", slope, i, j);
                }
            }
        }
    }

    #[test]
    fn adding_an_obstacle_never_raises_clearance(codes in sparse_states(20 * 20), at in 0..400usize, kind in 0..3usize) {
        let before = grid_from(&codes, 20, 20, 0.1);
        let mut codes2 = codes.clone();
        codes2[at] = [0, 4, 5][kind];
        let after = grid_from(&codes2, 20, 20, 0.1);
        for k in 0..400 {
            if !after.states[k].is_obstacle() {
                prop_assert!(after.esdf[k] <= before.esdf[k] + 1e-12);
            }
        }
    }

    #[test]
    fn gradient_matches_central_differences(codes in sparse_states(16 * 16), pts in prop::collection::vec((0..15usize, 0..15usize, 0.05..0.95f64, 0.05..0.95f64), 10)) {
        let g = grid_from(&codes, 16, 16, 0.1);
        let h = 1e-4;
        for (i, j, fx, fy) in pts {
            // stay inside one bilinear patch, away from its edges
            let p = g.center(i, j) + Vec2::new(fx, fy) * g.resolution;
            let s = query_esdf(&g, p.x, p.y);
            let dx = (query_esdf(&g, p.x + h, p.y).value - query_esdf(&g, p.x - h, p.y).value) / (2.0 * h);
            let dy = (query_esdf(&g, p.x, p.y + h).value - query_esdf(&g, p.x, p.y - h).value) / (2.0 * h);
            prop_assert!((s.gradient.x - dx).abs() < 1e-6 && (s.gradient.y - dy).abs() < 1e-6);
        }
    }
}

#[test]
fn floor_ramp_cell_semantics() {
    let config = RunConfig::default();
    let planes = common::floor_and_ramp(&config);
    let dilation = interline_dilation(config.mapping.resolution, config.robot.d_s);
    for plane in &planes {
        let g = &plane.grid;
        assert!(g.count(CellState::Interline) > 0, "crossing cells are missing");
        for j in 0..g.height {
            for i in 0..g.width {
                match g.state(i, j) {
                    CellState::Boundary => {
                        let supported = (j.saturating_sub(1)..=(j + 1).min(g.height - 1))
                            .any(|b| (i.saturating_sub(1)..=(i + 1).min(g.width - 1)).any(|a| g.state(a, b) == CellState::Safe));
                        assert!(supported, "Boundary cell ({i}, {j}) has no Safe neighbor");
                    }
                    CellState::Interline => {
                        let c = g.center(i, j);
                        let near = plane.neighbors.iter().any(|n| {
                            let a = plane.to_local(&n.segment.a);
                            let b = plane.to_local(&n.segment.b);
                            let t = ((c - a).dot(&(b - a)) / (b - a).norm_squared()).clamp(0.0, 1.0);
                            (a + (b - a) * t - c).norm() <= dilation + g.resolution
                        });
                        assert!(near, "Interline cell ({i}, {j}) is away from every crossing");
                    }
                    _ => {}
                }
            }
        }
    }
    // the crossing stays passable on both sides: some Interline cell has full clearance
    for plane in &planes {
        let g = &plane.grid;
        assert!((0..g.states.len()).any(|k| g.states[k] == CellState::Interline && g.esdf[k] >= config.robot.d_s));
    }
}
