//! Build a small occupancy grid by hand, compute its signed distance field
//! and query it between cell centers.
//!
//! `cargo run --example distance_field`

use planeway::geometry::Vec2;
use planeway::mapping::{compute_esdf, query_esdf, CellState, GridMap};

fn main() {
    let mut grid = GridMap::new(0.1, Vec2::zeros(), 30, 12);
    for j in 1..11 {
        for i in 1..29 {
            grid.set(i, j, CellState::Safe);
        }
    }
    // a wall stub and a crossing strip
    for j in 1..7 {
        grid.set(15, j, CellState::Occupied);
    }
    for j in 1..11 {
        grid.set(27, j, CellState::Interline);
    }
    compute_esdf(&mut grid);

    for j in (0..grid.height).rev() {
        let row: String = (0..grid.width).map(|i| grid.state(i, j).code()).collect();
        let esdf: Vec<String> = (0..grid.width).step_by(5).map(|i| format!("{:+.2}", grid.esdf[grid.index(i, j)])).collect();
        println!("{row}   {}", esdf.join(" "));
    }
    for (x, y) in [(0.7, 0.6), (1.2, 0.35), (1.55, 0.9), (3.5, 0.5)] {
        let s = query_esdf(&grid, x, y);
        println!("esdf({x:.2}, {y:.2}) = {:+.3} m, gradient ({:+.3}, {:+.3})", s.value, s.gradient.x, s.gradient.y);
    }
}
