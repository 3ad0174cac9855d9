//! Turns metric positions in a room into a connected grid trajectory.

use intent_monitor::harness::{discretize_trajectory, read_points_csv};
use intent_monitor::workspace::Connectivity;

const POINTS: &str =
    "t,x,y\n0.0,0.4,1.0\n0.4,0.9,1.8\n0.8,1.7,3.1\n1.2,2.6,4.9\n1.6,3.9,7.5\n2.0,4.2,9.4\n";

fn main() -> intent_monitor::Result<()> {
    let points = read_points_csv(POINTS.as_bytes())?;
    let trajectory = discretize_trajectory(&points, (8.4, 18.8), 50)?;
    assert_eq!(trajectory.first_gap(Connectivity::Eight), None);
    println!("{} points -> {} cells", points.len(), trajectory.len());
    trajectory.write_csv(std::io::stdout().lock())?;
    Ok(())
}
