//! Social and spatial diversity for a hand-built graph, then per area.

use tiescope::diversity::{area_diversity, compute_diversity, DiversityOptions, Kind};
use tiescope::graphs::CommGraph;
use tiescope::ingest::{Locations, UserId};

fn main() -> tiescope::Result<()> {
    // users 0-2 live in area 0, 3-4 in area 1, 5 in area 2
    let locations = Locations::from_indices(vec![Some(0), Some(0), Some(0), Some(1), Some(1), Some(2)]);
    let edges = [(0, 1, 3), (0, 3, 1), (1, 2, 5), (2, 3, 2), (2, 4, 2), (2, 5, 2), (3, 0, 4), (5, 4, 1)];
    let g = CommGraph::from_edges("demo", 6, edges.map(|(s, d, w)| (UserId(s), UserId(d), w)));

    let table = compute_diversity(&g, &locations, &DiversityOptions::new(3))?;
    println!("user  area  contacts  social  spatial");
    for u in &table.users {
        println!("{:>4}  {:>4}  {:>8}  {:.4}  {:.4}", u.user.0, u.area.unwrap_or(0), u.k, u.social, u.spatial);
    }
    let social = area_diversity(&table, Kind::Social);
    let spatial = area_diversity(&table, Kind::Spatial);
    for (a, s) in &social {
        println!("area {a}: social {s:.4}, spatial {:.4}", spatial[a]);
    }
    Ok(())
}
